"""Direct position-space walk evolution: the brute-force reference against
which the compiled-plate optics pipeline is validated.

Amplitudes are stored densely as a (2, n_sites) array over a symmetric site
window [-M, M]; the window is sized so the light cone never touches the
edges (the shift kernels drop amplitude that would leave the array).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .protocols import BlochGrid, ProtocolSpec, walk_operator_grid

NORM_TOL = 1e-10
_LIGHTCONE_MARGIN = 4


class SiteRangeError(ValueError):
    """The allocated site window cannot contain the light cone."""


@dataclass
class WalkerState:
    """Coin amplitudes (row 0: |L>, row 1: |R>) over sites [-half_range, half_range]."""

    amplitudes: np.ndarray = field(repr=False)  # (2, 2*half_range+1) complex
    half_range: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2, 2 * self.half_range + 1):
            raise ValueError("amplitude array does not match the site range")

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.half_range, self.half_range + 1)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def amplitude(self, m: int, coin: int) -> complex:
        return complex(self.amplitudes[coin, m + self.half_range])

    def support_radius(self) -> int:
        occupied = np.nonzero(np.abs(self.amplitudes).sum(axis=0))[0]
        if occupied.size == 0:
            return 0
        return int(max(abs(occupied.min() - self.half_range),
                       abs(occupied.max() - self.half_range)))


@dataclass
class ProbabilityDistribution:
    """P(m) over sites [-half_range, half_range]; sums to 1."""

    p: np.ndarray = field(repr=False)
    half_range: int

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.half_range, self.half_range + 1)

    def prob(self, m: int) -> float:
        if abs(m) > self.half_range:
            return 0.0
        return float(self.p[m + self.half_range])


def localized_input(coin, half_range: int = 0) -> WalkerState:
    """All amplitude on site m=0 with the given (normalized) coin state."""
    coin = np.asarray(coin, dtype=complex)
    if coin.shape != (2,):
        raise ValueError("coin must be a 2-component vector")
    n = np.linalg.norm(coin)
    if abs(n - 1.0) > 1e-8:
        raise ValueError(f"coin vector is not normalized (|c| = {n})")
    amps = np.zeros((2, 2 * half_range + 1), dtype=complex)
    amps[:, half_range] = coin
    return WalkerState(amps, half_range)


def linear_polarization_input(phi: float, half_range: int = 0) -> WalkerState:
    """Localized input with linear polarization (|L> + e^{i phi} |R>)/sqrt(2)."""
    return localized_input(np.array([1.0, np.exp(1j * phi)]) / np.sqrt(2), half_range)


def _pad(state: WalkerState, half_range: int) -> np.ndarray:
    extra = half_range - state.half_range
    if extra < 0:
        raise ValueError("cannot shrink the window")
    return np.pad(state.amplitudes, ((0, 0), (extra, extra)))


def apply_steps(psi: np.ndarray, spec: ProtocolSpec) -> None:
    """Run all steps of the protocol on a (batch, 2, n) array, in place."""
    from .protocols import coin_W, rotation_R

    w = coin_W()
    r = rotation_R()
    rdag = r.conj().T
    coins = {"W": w, "R": r, "Rdag": rdag}
    for k in range(spec.tau):
        delta = spec.delta_schedule[k]
        for factor in spec.factors:
            if factor in coins:
                u = coins[factor]
                _kernels.apply_coin(psi, u[0, 0], u[0, 1], u[1, 0], u[1, 1])
            elif factor == "T":
                _kernels.apply_shift(psi, np.cos(delta / 2), np.sin(delta / 2))
            else:  # sqrtT
                _kernels.apply_shift(psi, np.cos(delta / 4), np.sin(delta / 4))


def required_half_range(state0: WalkerState, spec: ProtocolSpec) -> int:
    return spec.coupling_range * spec.tau + state0.support_radius() + _LIGHTCONE_MARGIN


def evolve(state0: WalkerState, spec: ProtocolSpec, half_range: int | None = None) -> WalkerState:
    """Position-space evolution over all tau steps of the protocol."""
    needed = spec.coupling_range * spec.tau + state0.support_radius()
    if half_range is None:
        half_range = needed + _LIGHTCONE_MARGIN
    elif half_range < needed:
        raise SiteRangeError(
            f"site range {half_range} would truncate the light cone (need >= {needed})")
    psi = _pad(state0, half_range)[None]
    apply_steps(psi, spec)
    return WalkerState(psi[0], half_range)


def distribution(state: WalkerState) -> ProbabilityDistribution:
    """Coin-marginalized site distribution P(m) = |alpha_m|^2 + |beta_m|^2."""
    p = np.sum(np.abs(state.amplitudes) ** 2, axis=0)
    total = p.sum()
    if total == 0:
        raise ValueError("zero-norm state has no distribution")
    return ProbabilityDistribution(p / total, state.half_range)


def bloch_evolve(state0: WalkerState, spec: ProtocolSpec, grid: BlochGrid) -> WalkerState:
    """Evolution through quasi-momentum space (DFT, pointwise Bloch matrices, inverse DFT).

    The site m is paired with the phase factor exp(i m q); amplitudes are
    embedded modulo grid.n_samples, so the grid must resolve the full final
    support or the result would alias.
    """
    n = grid.n_samples
    half_range = spec.coupling_range * spec.tau + state0.support_radius() + _LIGHTCONE_MARGIN
    if n < 2 * half_range + 1:
        raise SiteRangeError(
            f"Bloch grid with {n} samples cannot hold a support of {2 * half_range + 1} sites")
    sites = np.arange(-state0.half_range, state0.half_range + 1)
    work = np.zeros((2, n), dtype=complex)
    np.add.at(work, (slice(None), np.mod(sites, n)), state0.amplitudes)
    # forward transform: psi~(q_k) = sum_m psi_m exp(+i m q_k)
    ft = np.fft.ifft(work, axis=1) * n
    u = walk_operator_grid(spec, grid.q_samples())  # (n, 2, 2)
    ft = np.einsum("kij,jk->ik", u, ft)
    out = np.fft.fft(ft, axis=1) / n
    amps = np.empty((2, 2 * half_range + 1), dtype=complex)
    m_out = np.arange(-half_range, half_range + 1)
    amps[:] = out[:, np.mod(m_out, n)]
    return WalkerState(amps, half_range)
