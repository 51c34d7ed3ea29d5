"""Compare the compiled shift/coin kernels against the numpy fallback.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from qwplates._kernels import _numpy

try:
    from qwplates._kernels import _core
except ImportError:
    _core = None


def run(kernels, tau=320, half=700, batch=2, repeats=5):
    n = 2 * half + 1
    best = np.inf
    for _ in range(repeats):
        psi = np.zeros((batch, 2, n), dtype=complex)
        psi[:, 0, half] = 1
        t0 = time.perf_counter()
        c, s = np.cos(np.pi / 4), np.sin(np.pi / 4)
        for _ in range(tau):
            kernels.apply_coin(psi, c + 0j, 1j * s, 1j * s, c + 0j)
            kernels.apply_shift(psi, c, s)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    t_np = run(_numpy)
    print(f"numpy fallback : {t_np * 1e3:8.2f} ms per 320-step evolution")
    if _core is None:
        print("compiled kernels unavailable (build with Cython to compare)")
        return
    t_c = run(_core)
    print(f"compiled       : {t_c * 1e3:8.2f} ms per 320-step evolution")
    print(f"speedup        : {t_np / t_c:8.2f}x")


if __name__ == "__main__":
    main()
