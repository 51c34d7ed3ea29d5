"""Compile a walk's Bloch operator into three waveplate angle profiles.

Pipeline: target operator per grid sample -> global-phase normalization to a
continuous SU(2) representative -> analytic eight-branch angle solve ->
sequential continuous-branch selection -> reconstruction verification ->
fabrication feasibility checks.

The three plates have fixed retardations (pi/2, pi, pi/2); the compiled
product Q_{pi/2}(theta3) Q_pi(theta2) Q_{pi/2}(theta1) matches the target up
to a global phase.  theta profiles are stored unwrapped (not reduced mod pi)
so they interpolate smoothly; the Jones matrices only see 2*theta mod 2*pi.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import su2
from .protocols import BlochGrid, ProtocolSpec, walk_operator_grid

RECONSTRUCTION_TOL = 1e-9
PLATE_RETARDATIONS = (np.pi / 2, np.pi, np.pi / 2)
DEGENERACY_TOL = 1e-7
JUMP_SAFETY_FACTOR = 1.5
# below ~2 steps the pattern slope is not tau-limited; keep a floor
_MIN_JUMP_TOL = 1e-6

DEFAULT_WAVELENGTH_NM = 633.0
DEFAULT_MIN_FAB_PERIOD_UM = 20.0
DEFAULT_PLATE_TRANSMITTANCE = 0.85
PARAXIAL_WARN_RATIO = 0.15


class CompilationError(RuntimeError):
    pass


class BranchSelectionError(CompilationError):
    def __init__(self, sample: int, jump: float, tol: float):
        super().__init__(
            f"no continuous branch at sample {sample}: best jump {jump:.4f} rad "
            f"exceeds tolerance {tol:.4f} (grid too coarse for this tau?)")
        self.sample = sample


@dataclass
class FeasibilityReport:
    min_modulation_period_um: float
    paraxial_ratio: float
    per_plate_transmittance: float
    total_transmittance: float
    max_sample_jump_rad: float
    resolution_ok: bool
    paraxial_ok: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class PlatePatternSet:
    """Three unwrapped optic-axis profiles over one Brillouin zone."""

    grid: BlochGrid
    theta1: np.ndarray = field(repr=False)
    theta2: np.ndarray = field(repr=False)
    theta3: np.ndarray = field(repr=False)
    protocol: str = ""
    tau: int = 0

    def __post_init__(self):
        for th in (self.theta1, self.theta2, self.theta3):
            if th.shape != (self.grid.n_samples,):
                raise ValueError("pattern length does not match the grid")

    def stacked(self) -> np.ndarray:
        return np.stack([self.theta1, self.theta2, self.theta3], axis=1)

    def plate_product(self) -> np.ndarray:
        """(n, 2, 2) Jones product of the three plates at each sample."""
        d1, d2, d3 = PLATE_RETARDATIONS
        return (su2.waveplate(d3, self.theta3)
                @ su2.waveplate(d2, self.theta2)
                @ su2.waveplate(d1, self.theta1))


@dataclass
class BranchCandidates:
    """Eight analytic angle triples per grid sample, plus solver context."""

    grid: BlochGrid
    triples: np.ndarray = field(repr=False)      # (n, 8, 3)
    components: np.ndarray = field(repr=False)   # (n, 4) SU(2) Pauli components
    degenerate: np.ndarray = field(repr=False)   # (n,) bool
    protocol: str = ""
    tau: int = 0


def _component_magnitudes(c):
    """(|sin g|, |cos g|) implied by the Pauli components of an SU(2) target."""
    sg = np.hypot(np.imag(c[..., 1]), np.imag(c[..., 2]))
    cg = np.hypot(np.imag(c[..., 3]), np.real(c[..., 0]))
    return sg, cg


_SIGNS = [(sc, ssg, scg) for sc in (1, -1) for ssg in (1, -1) for scg in (1, -1)]


def solve_angles(c, a_fallback: float = 0.0, b_fallback: float = 0.0) -> np.ndarray:
    """All eight analytic (theta1, theta2, theta3) triples for one target.

    Substitution: a = theta1+theta3, b = theta1-theta3, g = theta1-2*theta2+theta3,
    which turns the plate-product matching into
        cos b cos g = -c0,  sin a sin g = Im c1,
        cos a sin g = -Im c2,  sin b cos g = -Im c3.
    Branches enumerate the sign of sin g, the sign of cos g and the global
    sign of the components (the target is only fixed up to a global phase).
    At degenerate samples (sin g = 0 or cos g = 0) the undetermined angle
    combination is replaced by the supplied fallback.
    """
    c = np.asarray(c, dtype=complex)
    x1, x2 = np.imag(c[1]), -np.imag(c[2])
    y1, y2 = -np.imag(c[3]), -np.real(c[0])
    sgm = np.hypot(x1, x2)
    cgm = np.hypot(y1, y2)
    out = np.empty((8, 3))
    for idx, (sc, ssg, scg) in enumerate(_SIGNS):
        g = np.arctan2(ssg * sgm, scg * cgm)
        a = np.arctan2(sc * ssg * x1, sc * ssg * x2) if sgm > DEGENERACY_TOL else a_fallback
        b = np.arctan2(sc * scg * y1, sc * scg * y2) if cgm > DEGENERACY_TOL else b_fallback
        out[idx] = ((a + b) / 2, (a - g) / 2, (a - b) / 2)
    return out


def _solve_angles_grid(components: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized eight-branch solve over all samples (fallbacks = 0)."""
    c = components
    x1, x2 = np.imag(c[:, 1]), -np.imag(c[:, 2])
    y1, y2 = -np.imag(c[:, 3]), -np.real(c[:, 0])
    sgm = np.hypot(x1, x2)
    cgm = np.hypot(y1, y2)
    deg = (sgm < DEGENERACY_TOL) | (cgm < DEGENERACY_TOL)
    n = len(c)
    out = np.empty((n, 8, 3))
    for idx, (sc, ssg, scg) in enumerate(_SIGNS):
        g = np.arctan2(ssg * sgm, scg * cgm)
        a = np.where(sgm > DEGENERACY_TOL, np.arctan2(sc * ssg * x1, sc * ssg * x2), 0.0)
        b = np.where(cgm > DEGENERACY_TOL, np.arctan2(sc * scg * y1, sc * scg * y2), 0.0)
        out[:, idx, 0] = (a + b) / 2
        out[:, idx, 1] = (a - g) / 2
        out[:, idx, 2] = (a - b) / 2
    return out, deg


def _wrap_half_pi(d):
    """Signed mod-pi representative in (-pi/2, pi/2]."""
    return np.mod(d + np.pi / 2, np.pi) - np.pi / 2


def mod_pi_distance(a, b):
    """Angular distance between optic-axis angles (plates are pi-periodic)."""
    return np.abs(_wrap_half_pi(np.asarray(a) - np.asarray(b)))


def continuity_jump_tol(tau: int, grid: BlochGrid) -> float:
    """Largest admissible per-sample angle jump for a tau-step pattern."""
    return max(JUMP_SAFETY_FACTOR * np.pi * tau * grid.pitch_mm / grid.bz_length_mm,
               _MIN_JUMP_TOL)


def branch_candidates(spec: ProtocolSpec, grid: BlochGrid) -> BranchCandidates:
    """Targets, SU(2) normalization and the full candidate table for a walk."""
    targets = walk_operator_grid(spec, grid.q_samples())
    det = targets[:, 0, 0] * targets[:, 1, 1] - targets[:, 0, 1] * targets[:, 1, 0]
    # continuous square-root branch of the determinant along the scan:
    # flip the principal root wherever consecutive roots are anti-aligned
    phase = np.sqrt(det)
    aligned = np.real(phase[1:] * np.conj(phase[:-1])) >= 0
    signs = np.concatenate(([1.0], np.cumprod(np.where(aligned, 1.0, -1.0))))
    targets = targets / (phase * signs)[:, None, None]
    comps = np.stack([
        (targets[:, 0, 0] + targets[:, 1, 1]) / 2,
        (targets[:, 1, 0] + targets[:, 0, 1]) / 2,
        1j * (targets[:, 0, 1] - targets[:, 1, 0]) / 2,
        (targets[:, 0, 0] - targets[:, 1, 1]) / 2,
    ], axis=1)
    triples, deg = _solve_angles_grid(comps)
    return BranchCandidates(grid, triples, comps, deg,
                            protocol=spec.fingerprint(), tau=spec.tau)


def _scan(cands: BranchCandidates, seed_index: int, jump_tol: float) -> tuple[np.ndarray, float]:
    n = cands.grid.n_samples
    chosen = np.empty((n, 3))
    chosen[0] = cands.triples[0, seed_index]
    worst = 0.0
    for k in range(1, n):
        prev = chosen[k - 1]
        if cands.degenerate[k]:
            triples = solve_angles(cands.components[k], prev[0] + prev[2], prev[0] - prev[2])
        else:
            triples = cands.triples[k]
        d = _wrap_half_pi(triples - prev)
        scores = np.max(np.abs(d), axis=1)
        j = int(np.argmin(scores))
        chosen[k] = prev + d[j]
        worst = max(worst, scores[j])
    # backward fix-up: degenerate samples hold their free combination from the
    # successor, which repairs runs of degeneracy at the scan start
    for k in range(n - 2, -1, -1):
        if cands.degenerate[k]:
            nxt = chosen[k + 1]
            triples = solve_angles(cands.components[k], nxt[0] + nxt[2], nxt[0] - nxt[2])
            d = _wrap_half_pi(triples - nxt)
            j = int(np.argmin(np.max(np.abs(d), axis=1)))
            chosen[k] = nxt + d[j]
    jumps = np.max(np.abs(_wrap_half_pi(np.diff(chosen, axis=0))), axis=1)
    seam = float(np.max(mod_pi_distance(chosen[0], chosen[-1])))
    worst = float(max(jumps.max() if len(jumps) else 0.0, seam))
    return chosen, worst


def select_continuous_branch(cands: BranchCandidates,
                             jump_tol: float | None = None) -> tuple[PlatePatternSet, float]:
    """Pick one candidate per sample by sequential continuity.

    Seeds with the candidate closest to zero angles; if the resulting scan
    (including the Brillouin-zone wrap seam) violates the jump tolerance,
    every candidate at the first sample is retried as a seed.
    Returns the pattern set and the worst observed jump.
    """
    if jump_tol is None:
        jump_tol = continuity_jump_tol(cands.tau, cands.grid)
    seed_order = np.argsort(np.max(mod_pi_distance(cands.triples[0], 0.0), axis=1),
                            kind="stable")
    best: tuple[np.ndarray, float] | None = None
    for seed_index in seed_order:
        chosen, worst = _scan(cands, int(seed_index), jump_tol)
        if best is None or worst < best[1]:
            best = (chosen, worst)
        if worst <= jump_tol:
            break
    assert best is not None
    chosen, worst = best
    if worst > jump_tol:
        jumps = np.max(np.abs(_wrap_half_pi(np.diff(chosen, axis=0))), axis=1)
        bad = int(np.argmax(jumps)) + 1 if len(jumps) else 0
        raise BranchSelectionError(bad, worst, jump_tol)
    patterns = PlatePatternSet(cands.grid, chosen[:, 0].copy(), chosen[:, 1].copy(),
                               chosen[:, 2].copy(), protocol=cands.protocol, tau=cands.tau)
    return patterns, worst


def verify_reconstruction(patterns: PlatePatternSet, spec: ProtocolSpec) -> float:
    """Worst phase-insensitive distance between plate product and target."""
    targets = walk_operator_grid(spec, patterns.grid.q_samples())
    prod = patterns.plate_product()
    tr = np.einsum("nij,nij->n", targets.conj(), prod)
    return float(np.max(1.0 - np.abs(tr) / 2))


def feasibility_check(spec: ProtocolSpec, grid: BlochGrid,
                      wavelength_nm: float = DEFAULT_WAVELENGTH_NM,
                      min_fab_period_um: float = DEFAULT_MIN_FAB_PERIOD_UM,
                      per_plate_transmittance: float = DEFAULT_PLATE_TRANSMITTANCE,
                      n_plates: int = 3,
                      max_sample_jump_rad: float = 0.0) -> FeasibilityReport:
    """Fabrication resolution, paraxiality and transmittance arithmetic."""
    if wavelength_nm <= 0 or min_fab_period_um <= 0 or n_plates <= 0:
        raise ValueError("physical parameters must be positive")
    bz_um = grid.bz_length_mm * 1e3
    min_period = bz_um / spec.tau if spec.tau else np.inf
    paraxial = spec.tau * (wavelength_nm * 1e-6) / grid.bz_length_mm
    return FeasibilityReport(
        min_modulation_period_um=min_period,
        paraxial_ratio=paraxial,
        per_plate_transmittance=per_plate_transmittance,
        total_transmittance=per_plate_transmittance ** n_plates,
        max_sample_jump_rad=max_sample_jump_rad,
        resolution_ok=bool(min_period >= min_fab_period_um),
        paraxial_ok=bool(paraxial <= PARAXIAL_WARN_RATIO),
    )


def compile_patterns(spec: ProtocolSpec, grid: BlochGrid,
                     wavelength_nm: float = DEFAULT_WAVELENGTH_NM,
                     min_fab_period_um: float = DEFAULT_MIN_FAB_PERIOD_UM,
                     per_plate_transmittance: float = DEFAULT_PLATE_TRANSMITTANCE,
                     n_plates: int = 3) -> tuple[PlatePatternSet, FeasibilityReport]:
    """Full compile pipeline for one three-plate stage."""
    cands = branch_candidates(spec, grid)
    patterns, worst_jump = select_continuous_branch(cands)
    err = verify_reconstruction(patterns, spec)
    if err > RECONSTRUCTION_TOL:
        raise CompilationError(f"reconstruction distance {err:.3e} exceeds "
                               f"{RECONSTRUCTION_TOL:.0e}")
    report = feasibility_check(spec, grid, wavelength_nm, min_fab_period_um,
                               per_plate_transmittance, n_plates,
                               max_sample_jump_rad=worst_jump)
    return patterns, report


def split_stages(spec: ProtocolSpec, n_stages: int, grid: BlochGrid | None = None,
                 splits: list[int] | None = None,
                 **feas_kwargs) -> list[tuple[ProtocolSpec, PlatePatternSet]]:
    """Partition the schedule into contiguous stages and compile each one.

    The ordered product of the stage operators is verified to equal the full
    walk operator at every grid sample.
    """
    if grid is None:
        grid = BlochGrid.from_pitch()
    if splits is None:
        if spec.tau % n_stages:
            raise ValueError("n_stages must divide tau (or pass explicit splits)")
        size = spec.tau // n_stages
        splits = [size * k for k in range(1, n_stages)]
    bounds = [0, *splits, spec.tau]
    stages = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        sub = spec.substeps(lo, hi)
        patterns, _ = compile_patterns(sub, grid, **feas_kwargs)
        stages.append((sub, patterns))
    # stage composition check
    total = np.broadcast_to(np.eye(2, dtype=complex),
                            (grid.n_samples, 2, 2)).copy()
    for _, patterns in stages:
        total = patterns.plate_product() @ total
    full = walk_operator_grid(spec, grid.q_samples())
    tr = np.einsum("nij,nij->n", full.conj(), total)
    err = float(np.max(1.0 - np.abs(tr) / 2))
    if err > RECONSTRUCTION_TOL:
        raise CompilationError(f"stage composition error {err:.3e}")
    return stages


def export_patterns(patterns: PlatePatternSet, path) -> None:
    """Write the pattern file (text, tab-separated, 12 significant digits)."""
    grid = patterns.grid
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"# bz_length_mm={grid.bz_length_mm:.12g}\n")
        fh.write(f"# pitch_um={grid.pitch_mm * 1e3:.12g}\n")
        fh.write(f"# protocol={patterns.protocol}\n")
        fh.write(f"# tau={patterns.tau}\n")
        x = grid.x_samples_mm()
        for k in range(grid.n_samples):
            fh.write(f"{x[k]:.12g}\t{patterns.theta1[k]:.12g}"
                     f"\t{patterns.theta2[k]:.12g}\t{patterns.theta3[k]:.12g}\n")


def import_patterns(path) -> PlatePatternSet:
    header: dict[str, str] = {}
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                header[key] = value
            else:
                rows.append([float(tok) for tok in line.split("\t")])
    data = np.asarray(rows)
    grid = BlochGrid.from_pitch(float(header["bz_length_mm"]), float(header["pitch_um"]))
    if len(data) != grid.n_samples:
        raise ValueError("pattern file row count does not match its header grid")
    return PlatePatternSet(grid, data[:, 1], data[:, 2], data[:, 3],
                           protocol=header.get("protocol", ""),
                           tau=int(header.get("tau", 0)))
