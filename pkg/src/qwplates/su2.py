"""Exact 2x2 unitary algebra on the circular-polarization coin space.

Basis convention used throughout the package: the coin basis is
``(|L>, |R>)`` (left/right circular polarization), in that order.
All matrices are plain ``(2, 2)`` complex numpy arrays; ``waveplate`` and
friends also broadcast over trailing angle arrays and then return
``(..., 2, 2)``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_0, SIGMA_1, SIGMA_2, SIGMA_3)

UNITARITY_TOL = 1e-8


class NonUnitaryError(ValueError):
    """Raised when an operation requires a unitary input and the check fails."""


class PauliComponents(NamedTuple):
    """Expansion coefficients of a 2x2 matrix over (identity, Pauli vector)."""

    c0: complex
    c1: complex
    c2: complex
    c3: complex


def unitarity_defect(u) -> float:
    """Frobenius norm of U+U - I."""
    u = np.asarray(u, dtype=complex)
    return float(np.linalg.norm(u.conj().T @ u - SIGMA_0))


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        return False
    return unitarity_defect(u) <= tol


def _require_unitary(u, tol: float = UNITARITY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    d = unitarity_defect(u)
    if d > tol:
        raise NonUnitaryError(f"matrix is not unitary (defect {d:.3e} > {tol:.0e})")
    return u


def to_su2(u) -> np.ndarray:
    """Remove the global phase so that det = 1 (principal square root of det)."""
    u = np.asarray(u, dtype=complex)
    det = u[..., 0, 0] * u[..., 1, 1] - u[..., 0, 1] * u[..., 1, 0]
    return u / np.sqrt(det)[..., None, None]


def waveplate(delta: float, theta) -> np.ndarray:
    """Jones matrix of a birefringent plate with retardation delta and
    optic-axis angle theta, in the circular basis.

    theta may be an array; the result then has shape theta.shape + (2, 2).
    Determinant is exactly 1; theta enters only through 2*theta, so the
    matrix is pi-periodic in theta.
    """
    theta = np.asarray(theta, dtype=float)
    c = np.cos(delta / 2)
    s = np.sin(delta / 2)
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 1, 1] = c
    out[..., 0, 1] = 1j * s * np.exp(-2j * theta)
    out[..., 1, 0] = 1j * s * np.exp(2j * theta)
    return out


def pauli_decompose(u) -> PauliComponents:
    """Coefficients c_a = Tr(sigma_a U) / 2 of U = sum_a c_a sigma_a."""
    u = np.asarray(u, dtype=complex)
    return PauliComponents(
        (u[0, 0] + u[1, 1]) / 2,
        (u[1, 0] + u[0, 1]) / 2,
        1j * (u[0, 1] - u[1, 0]) / 2,
        (u[0, 0] - u[1, 1]) / 2,
    )


def pauli_compose(c: PauliComponents) -> np.ndarray:
    c0, c1, c2, c3 = c
    return np.array([[c0 + c3, c1 - 1j * c2], [c1 + 1j * c2, c0 - c3]], dtype=complex)


def _axis_angle(u):
    """Split a unitary as exp(i*alpha) * (cos(w) I + i sin(w) n.sigma).

    Returns (alpha, w, n) with n a real unit 3-vector (arbitrary when w=0).
    """
    u = np.asarray(u, dtype=complex)
    det = u[..., 0, 0] * u[..., 1, 1] - u[..., 0, 1] * u[..., 1, 0]
    alpha = np.angle(det) / 2
    v = u * np.exp(-1j * alpha)[..., None, None]
    c0 = np.clip(np.real(v[..., 0, 0] + v[..., 1, 1]) / 2, -1.0, 1.0)
    n = np.stack(
        [
            np.imag(v[..., 1, 0] + v[..., 0, 1]) / 2,
            np.real(v[..., 0, 1] - v[..., 1, 0]) / 2,
            np.imag(v[..., 0, 0] - v[..., 1, 1]) / 2,
        ],
        axis=-1,
    )
    norm = np.linalg.norm(n, axis=-1)
    w = np.arctan2(norm, c0)
    with np.errstate(invalid="ignore", divide="ignore"):
        nhat = np.where(norm[..., None] > 0, n / np.where(norm == 0, 1, norm)[..., None], 0.0)
    return alpha, w, nhat


def _from_axis_angle(alpha, w, nhat) -> np.ndarray:
    c = np.cos(w)
    s = np.sin(w)
    out = np.empty(np.shape(w) + (2, 2), dtype=complex)
    out[..., 0, 0] = c + 1j * s * nhat[..., 2]
    out[..., 1, 1] = c - 1j * s * nhat[..., 2]
    out[..., 0, 1] = 1j * s * (nhat[..., 0] - 1j * nhat[..., 1])
    out[..., 1, 0] = 1j * s * (nhat[..., 0] + 1j * nhat[..., 1])
    return out * np.exp(1j * np.asarray(alpha))[..., None, None]


def matrix_power(u, tau: int) -> np.ndarray:
    """U**tau for unitary U and integer tau >= 0.

    Small powers (tau <= 32) are exact repeated products; larger powers use
    the eigenphase scaling form, which keeps the result unitary to ~1e-10
    even for tau in the hundreds.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    u = _require_unitary(u)
    if tau <= 32:
        out = SIGMA_0.copy()
        for _ in range(tau):
            out = u @ out
        return out
    alpha, w, nhat = _axis_angle(u)
    return _from_axis_angle(tau * alpha, tau * w, nhat)


def eigenphases(u) -> tuple[float, float]:
    """Arguments of the two eigenvalues, each in (-pi, pi], larger first."""
    u = _require_unitary(u)
    phases = np.angle(np.linalg.eigvals(u))
    # fold the branch point onto +pi so the interval is (-pi, pi]
    phases = np.where(phases <= -np.pi + 1e-15, phases + 2 * np.pi, phases)
    hi, lo = max(phases), min(phases)
    return float(hi), float(lo)


def phase_distance(u, v) -> float:
    """d = 1 - |Tr(U+ V)|/2; zero iff U and V agree up to a global phase."""
    u = _require_unitary(u)
    v = _require_unitary(v)
    return float(max(0.0, 1.0 - abs(np.trace(u.conj().T @ v)) / 2))


def random_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar-random SU(2) matrix (QR of a complex Ginibre sample, det-normalized)."""
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    q = q @ np.diag(r.diagonal() / np.abs(r.diagonal()))
    return to_su2(q)
