"""Compiled kernels and the numpy fallback must agree bit-for-bit in contract."""

import numpy as np
import pytest

from qwplates._kernels import _numpy, backend_name

try:
    from qwplates._kernels import _core
except ImportError:
    _core = None

BACKENDS = [_numpy] + ([_core] if _core is not None else [])


def random_state(rng, batch=3, n=41):
    return rng.normal(size=(batch, 2, n)) + 1j * rng.normal(size=(batch, 2, n))


def reference_shift(psi, c, s):
    """Independent roll-based implementation of the coin-dependent shift."""
    alpha, beta = psi[:, 0], psi[:, 1]
    shifted_beta = np.roll(beta, 1, axis=-1)
    shifted_beta[:, 0] = 0
    shifted_alpha = np.roll(alpha, -1, axis=-1)
    shifted_alpha[:, -1] = 0
    out = np.empty_like(psi)
    out[:, 0] = c * alpha + 1j * s * shifted_beta
    out[:, 1] = 1j * s * shifted_alpha + c * beta
    return out


@pytest.mark.parametrize("kernels", BACKENDS, ids=lambda k: k.BACKEND)
class TestKernels:
    def test_coin(self, kernels):
        rng = np.random.default_rng(0)
        psi = random_state(rng)
        u = np.array([[1, 1j], [1j, 1]]) / np.sqrt(2)
        expected = np.einsum("ij,bjn->bin", u, psi)
        kernels.apply_coin(psi, u[0, 0], u[0, 1], u[1, 0], u[1, 1])
        assert np.allclose(psi, expected, atol=1e-14)

    def test_shift_matches_reference(self, kernels):
        rng = np.random.default_rng(1)
        psi = random_state(rng)
        c, s = np.cos(0.8), np.sin(0.8)
        expected = reference_shift(psi, c, s)
        kernels.apply_shift(psi, c, s)
        assert np.allclose(psi, expected, atol=1e-14)

    def test_full_shift_moves_one_site(self, kernels):
        psi = np.zeros((1, 2, 5), dtype=complex)
        psi[0, 0, 2] = 1.0  # |L> at the center
        kernels.apply_shift(psi, 0.0, 1.0)  # delta = pi: pure swap-shift
        expected = np.zeros_like(psi)
        expected[0, 1, 1] = 1j  # flipped coin one site over, with phase i
        assert np.allclose(psi, expected, atol=1e-15)

    def test_zero_retardation_is_identity(self, kernels):
        rng = np.random.default_rng(2)
        psi = random_state(rng)
        before = psi.copy()
        kernels.apply_shift(psi, 1.0, 0.0)
        assert np.array_equal(psi, before)


@pytest.mark.skipif(_core is None, reason="compiled kernels not built")
def test_backends_agree_over_many_steps():
    rng = np.random.default_rng(3)
    a = random_state(rng, batch=2, n=201)
    b = a.copy()
    u = np.array([[np.cos(0.3), 1j * np.sin(0.3)], [1j * np.sin(0.3), np.cos(0.3)]])
    for _ in range(50):
        _numpy.apply_coin(a, u[0, 0], u[0, 1], u[1, 0], u[1, 1])
        _numpy.apply_shift(a, np.cos(0.7), np.sin(0.7))
        _core.apply_coin(b, u[0, 0], u[0, 1], u[1, 0], u[1, 1])
        _core.apply_shift(b, np.cos(0.7), np.sin(0.7))
    assert np.max(np.abs(a - b)) < 1e-12


def test_backend_name_reported():
    assert backend_name() in ("cython", "numpy")
