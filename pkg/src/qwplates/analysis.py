"""Distribution comparison, coin tomography and entanglement dynamics.

Stokes convention (fixed for the whole package, coin basis (|L>, |R>)):

    index  +1 eigenstate        -1 eigenstate       s_i = I(+) - I(-)
    s1     (|L>+|R>)/sqrt2 "H"  (|L>-|R>)/sqrt2 "V"  Tr(sigma_1 rho)
    s2     (|L>+i|R>)/sqrt2 "D" (|L>-i|R>)/sqrt2 "A" Tr(sigma_2 rho)
    s3     |L>                  |R>                   Tr(sigma_3 rho)

with intensities normalized pairwise, so rho = (I + s . sigma) / 2
reproduces the traced density matrix exactly for exact intensities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import su2
from .lattice import (ProbabilityDistribution, WalkerState, apply_steps,
                      linear_polarization_input)
from .protocols import ProtocolSpec, disorder_schedule

_SQ2 = np.sqrt(2)
PROJECTORS: dict[str, np.ndarray] = {
    "H": np.array([1, 1]) / _SQ2,
    "V": np.array([1, -1]) / _SQ2,
    "D": np.array([1, 1j]) / _SQ2,
    "A": np.array([1, -1j]) / _SQ2,
    "L": np.array([1, 0], dtype=complex),
    "R": np.array([0, 1], dtype=complex),
}
PROJECTION_ORDER = ("H", "V", "D", "A", "L", "R")

_EIG_CLIP = 1e-10


class StokesVector(NamedTuple):
    s1: float
    s2: float
    s3: float


def similarity(pa: ProbabilityDistribution, pb: ProbabilityDistribution) -> float:
    """Squared Bhattacharyya overlap; sites absent from one range count as 0."""
    half = max(pa.half_range, pb.half_range)
    a = np.zeros(2 * half + 1)
    b = np.zeros(2 * half + 1)
    a[half - pa.half_range:half + pa.half_range + 1] = pa.p
    b[half - pb.half_range:half + pb.half_range + 1] = pb.p
    return float(np.sum(np.sqrt(a * b)) ** 2)


def reduced_density_matrix(state: WalkerState) -> np.ndarray:
    """Trace out the walker: 2x2 coin density matrix."""
    a, b = state.amplitudes
    rho = np.array([[np.vdot(a, a), np.vdot(b, a)],
                    [np.vdot(a, b), np.vdot(b, b)]])
    return rho / np.real(np.trace(rho))


def von_neumann_entropy(rho) -> float:
    """-Tr(rho log2 rho); 0*log(0) = 0; small negative eigenvalues clipped."""
    ev = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    if ev.min() < -_EIG_CLIP or ev.max() > 1 + _EIG_CLIP:
        raise ValueError(f"eigenvalues {ev} outside [0, 1]")
    ev = np.clip(ev, 0.0, 1.0)
    ev = ev[ev > 0]
    return float(-(ev * np.log2(ev)).sum())


def projection_intensities(state: WalkerState) -> dict[str, float]:
    """The six ideal projective intensities of the evolved beam."""
    out = {}
    for name, vec in PROJECTORS.items():
        proj = np.einsum("j,jn->n", vec.conj(), state.amplitudes)
        out[name] = float(np.sum(np.abs(proj) ** 2))
    return out


def stokes_from_projections(intensities) -> tuple[StokesVector, np.ndarray]:
    """Reconstruct (s, rho) from six intensities (dict or H,V,D,A,L,R sequence)."""
    if not isinstance(intensities, dict):
        intensities = dict(zip(PROJECTION_ORDER, intensities))
    vals = [float(intensities[k]) for k in PROJECTION_ORDER]
    if any(v < 0 for v in vals):
        raise ValueError("intensities must be non-negative")
    s = []
    for plus, minus in ((vals[0], vals[1]), (vals[2], vals[3]), (vals[4], vals[5])):
        tot = plus + minus
        if tot <= 0:
            raise ValueError("paired intensities sum to zero")
        s.append((plus - minus) / tot)
    s = np.asarray(s)
    norm = np.linalg.norm(s)
    if norm > 1 + 1e-6:
        raise ValueError(f"unphysical Stokes vector (|s| = {norm})")
    if norm > 1:
        s = s / norm
    rho = (su2.SIGMA_0 + s[0] * su2.SIGMA_1 + s[1] * su2.SIGMA_2 + s[2] * su2.SIGMA_3) / 2
    return StokesVector(*s), rho


@dataclass
class EntropyCurve:
    """Ensemble mean and standard error of the coin entropy versus step count."""

    taus: np.ndarray
    mean: np.ndarray = field(repr=False)
    stderr: np.ndarray = field(repr=False)


def _basis_evolution_entropies(family: str, schedule: np.ndarray,
                               coins: np.ndarray, taus: Sequence[int],
                               factors=None) -> np.ndarray:
    """Coin entropy of each input at each requested tau, for one schedule.

    The evolution is linear, so the two coin-basis states are evolved once
    and every input is assembled from them; the per-input density matrix is
    a quadratic form in the basis-state Gram tensor.
    """
    tau_max = int(schedule.shape[0])
    spec_full = ProtocolSpec(family, tau_max, tuple(float(d) for d in schedule),
                             custom_factors=factors)
    half = spec_full.coupling_range * tau_max + 4
    n = 2 * half + 1
    psi = np.zeros((2, 2, n), dtype=complex)  # (basis, coin, site)
    psi[0, 0, half] = 1
    psi[1, 1, half] = 1
    want = sorted(set(int(t) for t in taus))
    out = np.empty((len(want), len(coins)))
    row = 0
    for t in range(tau_max + 1):
        if t > 0:
            step = spec_full.substeps(t - 1, t)
            apply_steps(psi, step)
        if row < len(want) and t == want[row]:
            gram = np.einsum("ipn,jqn->pqij", psi, psi.conj())  # (coin,coin,basis,basis)
            rho = np.einsum("ki,pqij,kj->kpq", coins, gram, coins.conj())
            tr = np.real(rho[:, 0, 0] + rho[:, 1, 1])
            rho = rho / tr[:, None, None]
            ev = np.clip(np.linalg.eigvalsh(rho), 0.0, 1.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = np.where(ev > 0, -ev * np.log2(np.where(ev > 0, ev, 1.0)), 0.0)
            out[row] = terms.sum(axis=1)
            row += 1
    return out


def linear_inputs(n: int) -> np.ndarray:
    """n linear-polarization coins, phases evenly spaced over [0, 2*pi)."""
    phis = 2 * np.pi * np.arange(n) / n
    return np.stack([np.ones(n), np.exp(1j * phis)], axis=1) / _SQ2


def entropy_dynamics(family: str, tau_max: int, coins: np.ndarray,
                     delta_center: float = np.pi, half_width: float = 0.0,
                     n_realizations: int = 1, seed: int = 0,
                     taus: Sequence[int] | None = None,
                     factors=None) -> EntropyCurve:
    """Mean coin entropy versus tau over an ensemble of inputs and schedules.

    half_width = 0 gives the ordered walk (a single realization suffices);
    otherwise each realization draws its own uniform disorder schedule from
    a deterministic seed sequence.
    """
    coins = np.asarray(coins, dtype=complex)
    if coins.ndim != 2 or coins.shape[1] != 2:
        raise ValueError("coins must have shape (n_inputs, 2)")
    if taus is None:
        taus = list(range(tau_max + 1))
    if half_width == 0.0:
        n_realizations = 1
    samples = []
    for r in range(n_realizations):
        schedule = (np.full(tau_max, delta_center) if half_width == 0.0 else
                    disorder_schedule(seed + r, tau_max, delta_center, half_width))
        samples.append(_basis_evolution_entropies(family, schedule, coins, taus, factors))
    stack = np.stack(samples)  # (real, tau, input)
    per_real = stack.mean(axis=2)  # input-averaged entropy per realization
    mean = per_real.mean(axis=0)
    # ensemble error bar: spread over disorder realizations (the input
    # average is part of the observable, not a noise source)
    stderr = (per_real.std(axis=0, ddof=1) / np.sqrt(len(samples))
              if len(samples) > 1 else np.zeros_like(mean))
    return EntropyCurve(np.asarray(sorted(set(int(t) for t in taus))), mean, stderr)


def entropy_input_sweep(family: str, tau: int, coins: np.ndarray,
                        delta_center: float = np.pi, half_width: float = 0.0,
                        n_realizations: int = 1, seed: int = 0,
                        factors=None) -> tuple[np.ndarray, np.ndarray]:
    """Per-input ensemble mean and standard error of the entropy at fixed tau."""
    coins = np.asarray(coins, dtype=complex)
    if half_width == 0.0:
        n_realizations = 1
    rows = []
    for r in range(n_realizations):
        schedule = (np.full(tau, delta_center) if half_width == 0.0 else
                    disorder_schedule(seed + r, tau, delta_center, half_width))
        rows.append(_basis_evolution_entropies(family, schedule, coins, [tau], factors)[0])
    stack = np.stack(rows)  # (real, input)
    mean = stack.mean(axis=0)
    stderr = (stack.std(axis=0, ddof=1) / np.sqrt(len(rows))
              if len(rows) > 1 else np.zeros_like(mean))
    return mean, stderr


def disordered_u3_state(tau: int, phi: float, seed: int,
                        center: float = np.pi, half_width: float = np.pi / 5) -> WalkerState:
    """One disordered-U3 evolution of a linear input (tomography test bed)."""
    from .lattice import evolve

    spec = ProtocolSpec.disordered("U3", tau, seed, center, half_width)
    return evolve(linear_polarization_input(phi), spec)
