"""Wave-optics realization of the compiled plate stack.

A polarized Gaussian beam is sampled on one transverse axis (the dynamics is
one-dimensional; the y profile factors out and only reappears in the
synthetic camera image).  Plates act as pointwise Jones multiplications,
the far field is a discrete Fourier transform, and mode amplitudes are
overlaps with the analytic Gaussian far-field envelope centered on each
quantized transverse momentum k_m = m * 2*pi / bz_length.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .compiler import PLATE_RETARDATIONS, PlatePatternSet
from .lattice import ProbabilityDistribution
from .protocols import BlochGrid
from . import su2

DEFAULT_WINDOW_PERIODS = 8
OFF_RETARDATION = 2 * np.pi


class ApertureError(ValueError):
    """Window too small for the requested beam."""


class AliasingError(ValueError):
    """Requested mode lies beyond the sampling Nyquist limit."""


@dataclass
class OpticalField:
    """Jones field (row 0: E_L, row 1: E_R) on a uniform transverse grid."""

    e: np.ndarray = field(repr=False)   # (2, n) complex
    pitch_mm: float
    wavelength_nm: float
    waist_mm: float

    @property
    def n_samples(self) -> int:
        return self.e.shape[1]

    @property
    def x_mm(self) -> np.ndarray:
        n = self.n_samples
        return (np.arange(n) - n // 2) * self.pitch_mm

    def power(self) -> float:
        return float(np.sum(np.abs(self.e) ** 2) * self.pitch_mm)


@dataclass
class ModeAmplitudes:
    """Complex amplitude per (site m, polarization); normalized to unit power."""

    m_min: int
    amplitudes: np.ndarray = field(repr=False)  # (2, n_modes)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.m_min, self.m_min + self.amplitudes.shape[1])

    def distribution(self) -> ProbabilityDistribution:
        p = np.sum(np.abs(self.amplitudes) ** 2, axis=0)
        sites = self.sites
        half = int(max(abs(sites[0]), abs(sites[-1])))
        full = np.zeros(2 * half + 1)
        full[sites + half] = p
        return ProbabilityDistribution(full / full.sum(), half)


@dataclass
class CameraImage:
    """Synthetic focal-plane intensity image."""

    pixels: np.ndarray = field(repr=False)  # (rows, cols) float, >= 0
    origin: tuple[int, int]                 # pixel coordinates of site m=0
    spot_spacing_px: int
    m_min: int
    m_max: int


def prepare_input(polarization, waist_mm: float = 5.0, window_mm: float | None = None,
                  pitch_mm: float = 0.004, wavelength_nm: float = 633.0,
                  bz_length_mm: float = 5.0) -> OpticalField:
    """Collimated Gaussian beam with a uniform polarization, unit power."""
    pol = np.asarray(polarization, dtype=complex)
    if pol.shape != (2,) or abs(np.linalg.norm(pol) - 1) > 1e-8:
        raise ValueError("polarization must be a normalized 2-component vector")
    if window_mm is None:
        window_mm = DEFAULT_WINDOW_PERIODS * bz_length_mm
    if window_mm < 6 * waist_mm:
        raise ApertureError(f"window {window_mm} mm clips the beam (need >= {6 * waist_mm} mm)")
    if waist_mm < bz_length_mm:
        warnings.warn("waist below one Brillouin zone: momentum modes overlap",
                      stacklevel=2)
    n = round(window_mm / pitch_mm)
    x = (np.arange(n) - n // 2) * pitch_mm
    env = np.exp(-x ** 2 / waist_mm ** 2)
    e = pol[:, None] * env[None, :]
    e /= np.sqrt(np.sum(np.abs(e) ** 2) * pitch_mm)
    return OpticalField(e, pitch_mm, wavelength_nm, waist_mm)


def _periodic_theta(theta: np.ndarray, grid: BlochGrid, x_mm: np.ndarray) -> np.ndarray:
    """Evaluate an unwrapped pattern at arbitrary x by periodic linear interpolation.

    Across the seam the first sample is continued shifted by the nearest
    multiple of pi, so interpolation never crosses an artificial pi jump.
    """
    n = grid.n_samples
    pos = np.mod(x_mm, grid.bz_length_mm) / grid.pitch_mm
    k0 = np.floor(pos).astype(int) % n
    frac = pos - np.floor(pos)
    th0 = theta[k0]
    k1 = k0 + 1
    wrap = k1 == n
    k1 = k1 % n
    th1 = theta[k1]
    if np.any(wrap):
        seam_target = theta[0] + np.pi * np.round((theta[n - 1] - theta[0]) / np.pi)
        th1 = np.where(wrap, seam_target, th1)
    return th0 + frac * (th1 - th0)


def apply_plate(field_in: OpticalField, theta: np.ndarray, grid: BlochGrid,
                delta: float, offset_mm: float = 0.0) -> OpticalField:
    """Pointwise Jones multiplication by the plate waveplate(delta, theta(x - offset))."""
    th = _periodic_theta(np.asarray(theta, dtype=float), grid, field_in.x_mm - offset_mm)
    jones = su2.waveplate(delta, th)  # (n, 2, 2)
    e = np.einsum("nij,jn->in", jones, field_in.e)
    return OpticalField(e, field_in.pitch_mm, field_in.wavelength_nm, field_in.waist_mm)


def apply_pattern_set(field_in: OpticalField, patterns: PlatePatternSet,
                      offsets_mm=(0.0, 0.0, 0.0),
                      retardations=PLATE_RETARDATIONS) -> OpticalField:
    """Propagate through the three closely-stacked plates of one stage."""
    out = field_in
    thetas = (patterns.theta1, patterns.theta2, patterns.theta3)
    for theta, delta, off in zip(thetas, retardations, offsets_mm):
        out = apply_plate(out, theta, patterns.grid, delta, off)
    return out


def far_field(field_in: OpticalField, bz_length_mm: float = 5.0,
              m_max: int | None = None) -> ModeAmplitudes:
    """Project the far field onto the quantized-momentum Gaussian modes."""
    n = field_in.n_samples
    ft = np.fft.fft(field_in.e, axis=1)
    k = 2 * np.pi * np.fft.fftfreq(n, d=field_in.pitch_mm)  # rad / mm
    dk = 2 * np.pi / bz_length_mm
    nyquist_m = int(np.floor(np.pi / field_in.pitch_mm / dk))
    if m_max is None:
        m_max = nyquist_m - 1
    if m_max >= nyquist_m:
        raise AliasingError(f"mode |m|={m_max} beyond the Nyquist limit {nyquist_m - 1}")
    sites = np.arange(-m_max, m_max + 1)
    # far-field envelope of a Gaussian of waist w0: exp(-k^2 w0^2 / 4);
    # it is negligible beyond a few mode spacings, so each overlap integral
    # only touches a local window of FFT bins around k_m
    order = np.argsort(k)
    ks = k[order]
    fts = ft[:, order]
    dkk = ks[1] - ks[0]
    half_win = max(8, int(np.ceil(12.0 / field_in.waist_mm / dkk)))
    centers = np.searchsorted(ks, sites * dk)
    idx = centers[:, None] + np.arange(-half_win, half_win + 1)[None, :]
    valid = (idx >= 0) & (idx < n)
    idx = np.clip(idx, 0, n - 1)
    env = np.exp(-(ks[idx] - sites[:, None] * dk) ** 2 * field_in.waist_mm ** 2 / 4)
    env *= valid
    norms = np.sqrt(np.sum(env ** 2, axis=1))
    amps = np.einsum("jmw,mw->jm", fts[:, idx], env) / norms[None, :]
    total = np.sqrt(np.sum(np.abs(amps) ** 2))
    if total == 0:
        raise ValueError("field carries no power in the requested modes")
    return ModeAmplitudes(-m_max, amps / total)


def render_camera(modes: ModeAmplitudes, spot_spacing_px: int = 12,
                  spot_sigma_px: float = 1.2, height_px: int = 15,
                  noise_floor: float = 0.0,
                  rng: np.random.Generator | None = None) -> CameraImage:
    """Sum of Gaussian spots at m * spacing with powers P(m)."""
    if spot_spacing_px <= 0 or spot_sigma_px <= 0:
        raise ValueError("spacing and spot width must be positive")
    sites = modes.sites
    p = np.sum(np.abs(modes.amplitudes) ** 2, axis=0)
    margin = spot_spacing_px
    cols = (sites[-1] - sites[0]) * spot_spacing_px + 2 * margin + 1
    origin_col = -sites[0] * spot_spacing_px + margin
    row0 = height_px // 2
    yy = (np.arange(height_px) - row0)[:, None]
    xx = np.arange(cols)[None, :]
    img = np.zeros((height_px, cols))
    s2 = 2 * spot_sigma_px ** 2
    norm = 2 * np.pi * spot_sigma_px ** 2
    for m, pm in zip(sites, p):
        if pm == 0:
            continue
        cx = origin_col + m * spot_spacing_px
        img += pm / norm * np.exp(-((xx - cx) ** 2 + yy ** 2) / s2)
    if noise_floor > 0:
        if rng is None:
            rng = np.random.default_rng(0)
        img += noise_floor * rng.random(img.shape)
    return CameraImage(img, (int(row0), int(origin_col)), spot_spacing_px,
                       int(sites[0]), int(sites[-1]))


def extract_distribution(image: CameraImage, origin: tuple[int, int] | None = None,
                         spot_spacing_px: int | None = None) -> ProbabilityDistribution:
    """5x5-pixel integration around each site spot, normalized to total intensity."""
    if origin is None:
        origin = image.origin
    if spot_spacing_px is None:
        spot_spacing_px = image.spot_spacing_px
    row0, col0 = origin
    rows, cols = image.pixels.shape
    intensities = {}
    for m in range(image.m_min, image.m_max + 1):
        c = col0 + m * spot_spacing_px
        if c - 2 < 0 or c + 2 >= cols or row0 - 2 < 0 or row0 + 2 >= rows:
            raise ValueError(f"spot m={m} overlaps the image boundary")
        intensities[m] = float(image.pixels[row0 - 2:row0 + 3, c - 2:c + 3].sum())
    total = sum(intensities.values())
    if total <= 0:
        raise ValueError("image carries no intensity")
    half = max(abs(image.m_min), abs(image.m_max))
    p = np.zeros(2 * half + 1)
    for m, val in intensities.items():
        p[m + half] = val / total
    return ProbabilityDistribution(p, half)


@dataclass
class MisalignmentResult:
    mean: ProbabilityDistribution
    mse: np.ndarray = field(repr=False)  # per-site mean standard error
    offsets_mm: np.ndarray = field(repr=False)


def misalignment_study(stages: list[PlatePatternSet], polarization,
                       offsets_mm: np.ndarray | None = None, repeats: int = 4,
                       offset_scale_mm: float = 0.020, seed: int = 0,
                       m_max: int | None = None, **beam_kwargs) -> MisalignmentResult:
    """Repeat the optics pipeline with random per-plate transverse offsets.

    Default offsets are uniform in [-offset_scale_mm, +offset_scale_mm]
    independently for every plate of every stage.
    """
    if offsets_mm is None:
        if repeats < 2:
            raise ValueError("need at least 2 repeats")
        rng = np.random.default_rng(seed)
        offsets_mm = rng.uniform(-offset_scale_mm, offset_scale_mm,
                                 size=(repeats, len(stages), 3))
    offsets_mm = np.asarray(offsets_mm, dtype=float)
    bz = stages[0].grid.bz_length_mm
    dists = []
    for sample in offsets_mm:
        f = prepare_input(polarization, bz_length_mm=bz, **beam_kwargs)
        for patterns, offs in zip(stages, sample):
            f = apply_pattern_set(f, patterns, offsets_mm=tuple(offs))
        dists.append(far_field(f, bz, m_max=m_max).distribution())
    half = max(d.half_range for d in dists)
    stack = np.zeros((len(dists), 2 * half + 1))
    for i, d in enumerate(dists):
        stack[i, half - d.half_range:half + d.half_range + 1] = d.p
    mean = stack.mean(axis=0)
    mse = stack.std(axis=0, ddof=1) / np.sqrt(len(dists)) if len(dists) > 1 else np.zeros_like(mean)
    return MisalignmentResult(ProbabilityDistribution(mean / mean.sum(), half), mse, offsets_mm)


def write_pgm16(image: CameraImage, path) -> None:
    """16-bit PGM plus a JSON sidecar with the calibration metadata."""
    px = image.pixels
    peak = px.max()
    scale = 65535.0 / peak if peak > 0 else 1.0
    data = np.round(px * scale).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{px.shape[1]} {px.shape[0]}\n65535\n".encode("ascii"))
        fh.write(data.tobytes())
    sidecar = {
        "origin_row": image.origin[0],
        "origin_col": image.origin[1],
        "spot_spacing_px": image.spot_spacing_px,
        "m_min": image.m_min,
        "m_max": image.m_max,
        "intensity_scale": scale,
    }
    with open(str(path) + ".json", "w", encoding="ascii") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)
        fh.write("\n")
