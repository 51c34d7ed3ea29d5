"""Walk protocols: step operators, Bloch (quasi-momentum) matrices,
disorder schedules and quasi-energy spectra.

Conventions pinned here and inherited by every other module:

* Coin basis (|L>, |R>).
* Forward hop t|m> = |m+1> appears in the Bloch translation matrix as the
  phase exp(+i q) on the upper-right coupling, pairing site m with the
  plane-wave phase exp(i m q).
* Step sequences are written in application order (first factor hits the
  state first); the matrix product therefore runs right to left.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import su2

# Primitive factors, in application order (first applied first).
PROTOCOL_FACTORS: dict[str, tuple[str, ...]] = {
    "U1": ("W", "T"),
    "U2": ("sqrtT", "W", "sqrtT"),
    "U3": ("R", "W", "T", "Rdag"),
}

_TRANSLATION_FACTORS = {"T", "sqrtT"}
_VALID_FACTORS = {"W", "R", "Rdag", "T", "sqrtT"}


def coin_W() -> np.ndarray:
    """Balanced coin rotation (equals waveplate(pi/2, 0))."""
    return np.array([[1, 1j], [1j, 1]], dtype=complex) / np.sqrt(2)


def rotation_R() -> np.ndarray:
    """Fixed pi/8-type rotation used by the U3 protocol."""
    c, s = np.cos(np.pi / 8), np.sin(np.pi / 8)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def translation_T_bloch(delta: float, q) -> np.ndarray:
    """Coin-dependent translation at quasi-momentum q.

    q may be an array; result has shape q.shape + (2, 2).
    """
    q = np.asarray(q, dtype=float)
    c, s = np.cos(delta / 2), np.sin(delta / 2)
    out = np.empty(q.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 1, 1] = c
    out[..., 0, 1] = 1j * s * np.exp(1j * q)
    out[..., 1, 0] = 1j * s * np.exp(-1j * q)
    return out


def sqrt_translation_bloch(delta: float, q) -> np.ndarray:
    """Principal square root of the translation: the half-retardation plate."""
    return translation_T_bloch(delta / 2, q)


@dataclass(frozen=True)
class DisorderSpec:
    """Uniform per-step retardation disorder over [center-hw, center+hw]."""

    seed: int
    center: float
    half_width: float

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError("half_width must be >= 0")


@dataclass(frozen=True)
class ProtocolSpec:
    """Declarative description of a tau-step walk."""

    family: str
    tau: int
    delta_schedule: tuple[float, ...]
    disorder: DisorderSpec | None = None
    custom_factors: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.family not in PROTOCOL_FACTORS and self.family != "custom":
            raise ValueError(f"unknown protocol family {self.family!r}")
        if self.family == "custom":
            if not self.custom_factors:
                raise ValueError("custom family requires custom_factors")
            bad = set(self.custom_factors) - _VALID_FACTORS
            if bad:
                raise ValueError(f"unknown primitive factors {sorted(bad)}")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        if len(self.delta_schedule) != self.tau:
            raise ValueError("delta_schedule length must equal tau")
        if self.disorder is not None:
            lo = self.disorder.center - self.disorder.half_width
            hi = self.disorder.center + self.disorder.half_width
            for d in self.delta_schedule:
                if not (lo - 1e-12 <= d <= hi + 1e-12):
                    raise ValueError("delta_schedule leaves the disorder interval")

    @classmethod
    def constant(cls, family: str, delta: float, tau: int, factors=None) -> "ProtocolSpec":
        return cls(family, tau, (float(delta),) * tau, custom_factors=factors)

    @classmethod
    def disordered(cls, family: str, tau: int, seed: int, center: float,
                   half_width: float, factors=None) -> "ProtocolSpec":
        sched = disorder_schedule(seed, tau, center, half_width)
        return cls(family, tau, tuple(float(d) for d in sched),
                   DisorderSpec(seed, center, half_width), custom_factors=factors)

    @property
    def factors(self) -> tuple[str, ...]:
        if self.family == "custom":
            return self.custom_factors  # type: ignore[return-value]
        return PROTOCOL_FACTORS[self.family]

    @property
    def coupling_range(self) -> int:
        """Lattice-site range reached by a single step."""
        return sum(1 for f in self.factors if f in _TRANSLATION_FACTORS)

    @property
    def is_constant(self) -> bool:
        return self.tau == 0 or all(d == self.delta_schedule[0] for d in self.delta_schedule)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(repr((self.family, self.factors, self.tau, self.delta_schedule)).encode())
        return f"{self.family}-tau{self.tau}-{h.hexdigest()[:12]}"

    def substeps(self, start: int, stop: int) -> "ProtocolSpec":
        """Contiguous slice of the schedule as its own spec (for staging)."""
        return ProtocolSpec(self.family, stop - start, self.delta_schedule[start:stop],
                            custom_factors=self.custom_factors)


@dataclass(frozen=True)
class BlochGrid:
    """Uniform sampling of one Brillouin zone of length bz_length_mm."""

    bz_length_mm: float
    pitch_mm: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples <= 0:
            raise ValueError("n_samples must be positive")
        if abs(self.n_samples * self.pitch_mm - self.bz_length_mm) > 1e-9 * self.bz_length_mm:
            raise ValueError("pitch must divide the Brillouin-zone length exactly")

    @classmethod
    def from_pitch(cls, bz_length_mm: float = 5.0, pitch_um: float = 4.0) -> "BlochGrid":
        pitch_mm = pitch_um * 1e-3
        n = round(bz_length_mm / pitch_mm)
        return cls(bz_length_mm, pitch_mm, n)

    def q_samples(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_samples) / self.n_samples

    def x_samples_mm(self) -> np.ndarray:
        return self.pitch_mm * np.arange(self.n_samples)


def _factor_matrix(factor: str, delta: float, q: np.ndarray) -> np.ndarray:
    if factor == "W":
        return np.broadcast_to(coin_W(), q.shape + (2, 2))
    if factor == "R":
        return np.broadcast_to(rotation_R(), q.shape + (2, 2))
    if factor == "Rdag":
        return np.broadcast_to(rotation_R().conj().T, q.shape + (2, 2))
    if factor == "T":
        return translation_T_bloch(delta, q)
    if factor == "sqrtT":
        return sqrt_translation_bloch(delta, q)
    raise ValueError(f"unknown factor {factor!r}")


def _step_operator_grid(spec: ProtocolSpec, step_index: int, q: np.ndarray) -> np.ndarray:
    if not 0 <= step_index < spec.tau:
        raise IndexError("step_index out of range")
    delta = spec.delta_schedule[step_index]
    out = np.broadcast_to(np.eye(2, dtype=complex), q.shape + (2, 2)).copy()
    for factor in spec.factors:
        out = _factor_matrix(factor, delta, q) @ out
    return out


def step_operator(spec: ProtocolSpec, step_index: int, q: float) -> np.ndarray:
    return _step_operator_grid(spec, step_index, np.asarray(float(q)))


def walk_operator_grid(spec: ProtocolSpec, q: np.ndarray) -> np.ndarray:
    """Full tau-step Bloch operator at each quasi-momentum in q."""
    q = np.asarray(q, dtype=float)
    if spec.tau == 0:
        return np.broadcast_to(np.eye(2, dtype=complex), q.shape + (2, 2)).copy()
    if spec.is_constant and spec.tau > 32:
        step = _step_operator_grid(spec, 0, q)
        alpha, w, nhat = su2._axis_angle(step)
        return su2._from_axis_angle(spec.tau * alpha, spec.tau * w, nhat)
    out = _step_operator_grid(spec, 0, q)
    for k in range(1, spec.tau):
        out = _step_operator_grid(spec, k, q) @ out
    return out


def walk_operator_bloch(spec: ProtocolSpec, q: float) -> np.ndarray:
    return walk_operator_grid(spec, np.asarray(float(q)))


@dataclass(frozen=True)
class QuasiEnergySpectrum:
    """Eigenphase bands of the single-step operator over one Brillouin zone."""

    grid: BlochGrid
    e_plus: np.ndarray = field(repr=False)
    e_minus: np.ndarray = field(repr=False)


def quasienergy_map(spec: ProtocolSpec, grid: BlochGrid) -> QuasiEnergySpectrum:
    """Band structure of a constant single-step protocol on the given grid."""
    if not spec.is_constant:
        raise ValueError("quasi-energy map requires a constant delta schedule")
    one_step = spec if spec.tau == 1 else ProtocolSpec.constant(
        spec.family, spec.delta_schedule[0] if spec.tau else 0.0, 1,
        factors=spec.custom_factors)
    q = grid.q_samples()
    u = _step_operator_grid(one_step, 0, q)
    ev = np.linalg.eigvals(u)
    phases = np.sort(np.angle(ev), axis=-1)
    return QuasiEnergySpectrum(grid, e_plus=phases[:, 1], e_minus=phases[:, 0])


def disorder_schedule(seed: int, tau: int, center: float, half_width: float) -> np.ndarray:
    """tau retardations drawn i.i.d. uniform from [center-hw, center+hw]."""
    if half_width < 0:
        raise ValueError("half_width must be >= 0")
    rng = np.random.default_rng(seed)
    return rng.uniform(center - half_width, center + half_width, size=tau)
