"""Pure-numpy walk-step kernels (fallback backend).

Same contract as the compiled extension in ``_core.pyx``: states are
``(batch, 2, n_sites)`` complex128 arrays holding the two coin amplitudes
per lattice site, and all kernels update them in place.  Shifts do not
wrap: amplitudes moved past the array edge are dropped, which is only
correct when the caller keeps the light cone inside the allocated range.
"""

import numpy as np

BACKEND = "numpy"


def apply_coin(psi: np.ndarray, u00: complex, u01: complex, u10: complex, u11: complex) -> None:
    """Site-local 2x2 coin rotation, in place."""
    a = psi[:, 0].copy()
    psi[:, 0] *= u00
    psi[:, 0] += u01 * psi[:, 1]
    psi[:, 1] *= u11
    psi[:, 1] += u10 * a


def apply_shift(psi: np.ndarray, cos_half: float, sin_half: float) -> None:
    """Coin-dependent translation, in place.

    alpha'[m] = cos * alpha[m] + i sin * beta[m-1]
    beta'[m]  = i sin * alpha[m+1] + cos * beta[m]
    """
    a = psi[:, 0]
    b = psi[:, 1]
    isin = 1j * sin_half
    a_new = cos_half * a
    a_new[:, 1:] += isin * b[:, :-1]
    b_new = cos_half * b
    b_new[:, :-1] += isin * a[:, 1:]
    a[:] = a_new
    b[:] = b_new
