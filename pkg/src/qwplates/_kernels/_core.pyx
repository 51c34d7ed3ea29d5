# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled walk-step kernels.

Contract matches ``_numpy.py``: states are (batch, 2, n_sites) complex128
arrays updated in place; shifts drop amplitude at the array edges.
"""

import numpy as np
cimport numpy as cnp

BACKEND = "cython"


def apply_coin(cnp.complex128_t[:, :, ::1] psi, double complex u00,
               double complex u01, double complex u10, double complex u11):
    cdef Py_ssize_t bi, m
    cdef Py_ssize_t nb = psi.shape[0], n = psi.shape[2]
    cdef double complex a
    for bi in range(nb):
        for m in range(n):
            a = psi[bi, 0, m]
            psi[bi, 0, m] = u00 * a + u01 * psi[bi, 1, m]
            psi[bi, 1, m] = u10 * a + u11 * psi[bi, 1, m]


def apply_shift(cnp.complex128_t[:, :, ::1] psi, double cos_half, double sin_half):
    """Coin-dependent translation, in place.

    alpha'[m] = cos * alpha[m] + i sin * beta[m-1]
    beta'[m]  = i sin * alpha[m+1] + cos * beta[m]
    """
    cdef Py_ssize_t bi, m
    cdef Py_ssize_t nb = psi.shape[0], n = psi.shape[2]
    cdef double complex isin = 1j * sin_half
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] scratch_arr = np.empty(n, dtype=np.complex128)
    cdef cnp.complex128_t[::1] old_a = scratch_arr
    for bi in range(nb):
        for m in range(n):
            old_a[m] = psi[bi, 0, m]
        psi[bi, 0, 0] = cos_half * old_a[0]
        for m in range(1, n):
            psi[bi, 0, m] = cos_half * old_a[m] + isin * psi[bi, 1, m - 1]
        for m in range(n - 1):
            psi[bi, 1, m] = isin * old_a[m + 1] + cos_half * psi[bi, 1, m]
        psi[bi, 1, n - 1] = cos_half * psi[bi, 1, n - 1]
