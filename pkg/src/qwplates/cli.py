"""Command-line front end: config parsing, pipeline orchestration, export.

Subcommands
    compile   patterns + feasibility report
    simulate  optics pipeline vs lattice oracle, camera image, similarity
    entropy   disorder-ensemble entanglement entropy data + plots

Config files are INI (key = value under [section] headers); every key is
checked against a whitelist so typos fail loudly.  Angles accept simple
symbolic expressions such as "pi", "7pi/4" or "0.25".

Exit codes: 0 success, 2 config error, 3 feasibility hard-fail,
4 numerical verification failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import analysis, compiler, dataio, optics, plots
from .compiler import (BranchSelectionError, CompilationError, FeasibilityReport,
                       compile_patterns, export_patterns, split_stages)
from .lattice import distribution, evolve, linear_polarization_input
from .protocols import BlochGrid, ProtocolSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FEASIBILITY = 3
EXIT_NUMERICAL = 4


class ConfigError(ValueError):
    pass


_ANGLE_RE = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?P<num>\d+(?:\.\d*)?)?\s*\*?\s*(?P<pi>pi)?"
    r"\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$")


def parse_angle(text: str) -> float:
    """Evaluate expressions like 'pi', '7pi/4', '-pi/5' or '1.25'."""
    m = _ANGLE_RE.match(text)
    if not m or (m.group("num") is None and m.group("pi") is None):
        raise ConfigError(f"cannot parse angle {text!r}")
    value = float(m.group("num")) if m.group("num") else 1.0
    if m.group("pi"):
        value *= np.pi
    if m.group("den"):
        value /= float(m.group("den"))
    if m.group("sign") == "-":
        value = -value
    return value


_SCHEMA = {
    "protocol": {"family", "tau", "delta", "factors", "disorder",
                 "disorder_center", "disorder_half_width", "seed"},
    "grid": {"bz_length_mm", "pitch_um"},
    "optics": {"wavelength_nm", "waist_mm", "window_periods",
               "min_fab_period_um", "plate_transmittance"},
    "camera": {"spot_spacing_px", "spot_sigma_px", "noise_floor"},
    "simulate": {"polarization_phi", "stages", "misalignment", "misalignment_repeats",
                 "misalignment_offset_um"},
    "entropy": {"family", "tau", "n_phis", "n_realizations", "delta_center",
                "half_width", "curve", "curve_n_inputs", "curve_tau_stride"},
}


def load_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        unknown = set(parser[section]) - _SCHEMA[section]
        if unknown:
            raise ConfigError(
                f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")
    return parser


def _get(cfg, section, key, default, conv=str):
    if cfg.has_option(section, key):
        raw = cfg.get(section, key)
        try:
            return conv(raw)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc
    if default is None:
        raise ConfigError(f"missing required key {key} in [{section}]")
    return default


def _get_bool(cfg, section, key, default):
    if cfg.has_option(section, key):
        try:
            return cfg.getboolean(section, key)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: {exc}") from exc
    return default


def build_grid(cfg) -> BlochGrid:
    return BlochGrid.from_pitch(_get(cfg, "grid", "bz_length_mm", 5.0, float),
                                _get(cfg, "grid", "pitch_um", 4.0, float))


def build_protocol(cfg, seed_override: int | None = None) -> ProtocolSpec:
    family = _get(cfg, "protocol", "family", None)
    tau = _get(cfg, "protocol", "tau", None, int)
    factors = None
    if cfg.has_option("protocol", "factors"):
        factors = tuple(tok.strip() for tok in
                        cfg.get("protocol", "factors").split(",") if tok.strip())
    try:
        if _get_bool(cfg, "protocol", "disorder", False):
            seed = seed_override if seed_override is not None else \
                _get(cfg, "protocol", "seed", 0, int)
            return ProtocolSpec.disordered(
                family, tau, seed,
                _get(cfg, "protocol", "disorder_center", np.pi, parse_angle),
                _get(cfg, "protocol", "disorder_half_width", None, parse_angle),
                factors=factors)
        delta = _get(cfg, "protocol", "delta", None, parse_angle)
        return ProtocolSpec.constant(family, delta, tau, factors=factors)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _feas_kwargs(cfg) -> dict:
    return dict(
        wavelength_nm=_get(cfg, "optics", "wavelength_nm", 633.0, float),
        min_fab_period_um=_get(cfg, "optics", "min_fab_period_um",
                               compiler.DEFAULT_MIN_FAB_PERIOD_UM, float),
        per_plate_transmittance=_get(cfg, "optics", "plate_transmittance",
                                     compiler.DEFAULT_PLATE_TRANSMITTANCE, float),
    )


def _write_json(obj, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _compile_stages(cfg, spec, grid, n_stages):
    feas = _feas_kwargs(cfg)
    if n_stages <= 1:
        patterns, report = compile_patterns(spec, grid, **feas)
        return [(spec, patterns)], [report]
    stages = split_stages(spec, n_stages, grid, **feas)
    reports = []
    for sub, patterns in stages:
        reports.append(compiler.feasibility_check(
            sub, grid, n_plates=3, **feas,
            max_sample_jump_rad=float(np.max(np.abs(
                np.diff(patterns.stacked(), axis=0))))))
    return stages, reports


def cmd_compile(cfg, out: Path, seed, force: bool, n_stages: int) -> int:
    spec = build_protocol(cfg, seed)
    grid = build_grid(cfg)
    try:
        stages, reports = _compile_stages(cfg, spec, grid, n_stages)
    except BranchSelectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CompilationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for i, (_, patterns) in enumerate(stages, start=1):
        name = "patterns.txt" if len(stages) == 1 else f"patterns_stage{i}.txt"
        export_patterns(patterns, out / name)
    _write_json({"protocol": spec.fingerprint(), "n_stages": len(stages),
                 "stages": [r.as_dict() for r in reports]},
                out / "feasibility.json")
    plots.plot_patterns(stages[0][1], str(out / "patterns.svg"))
    if not all(r.resolution_ok for r in reports):
        worst = min(r.min_modulation_period_um for r in reports)
        print(f"feasibility hard-fail: min modulation period {worst:.4g} um "
              f"below the fabrication limit", file=sys.stderr)
        if not force:
            return EXIT_FEASIBILITY
    for r in reports:
        if not r.paraxial_ok:
            print(f"warning: paraxial ratio {r.paraxial_ratio:.3g} is large",
                  file=sys.stderr)
    print(f"compiled {len(stages)} stage(s), tau={spec.tau}, "
          f"min period {min(r.min_modulation_period_um for r in reports):.4g} um")
    return EXIT_OK


def _nyquist_mode_limit(pitch_mm: float, bz_length_mm: float) -> int:
    dk = 2 * np.pi / bz_length_mm
    return int(np.floor(np.pi / pitch_mm / dk)) - 1


def cmd_simulate(cfg, out: Path, seed, force: bool, n_stages: int) -> int:
    spec = build_protocol(cfg, seed)
    grid = build_grid(cfg)
    phi = _get(cfg, "simulate", "polarization_phi", 0.0, parse_angle)
    if n_stages == 1:
        n_stages = _get(cfg, "simulate", "stages", 1, int)
    try:
        stages, _ = _compile_stages(cfg, spec, grid, n_stages)
    except CompilationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    waist = _get(cfg, "optics", "waist_mm", grid.bz_length_mm, float)
    window = _get(cfg, "optics", "window_periods",
                  optics.DEFAULT_WINDOW_PERIODS, float) * grid.bz_length_mm
    wavelength = _get(cfg, "optics", "wavelength_nm", 633.0, float)
    state0 = linear_polarization_input(phi)
    beam = optics.prepare_input(state0.amplitudes[:, 0], waist_mm=waist,
                                window_mm=window, pitch_mm=grid.pitch_mm,
                                wavelength_nm=wavelength,
                                bz_length_mm=grid.bz_length_mm)
    field_out = beam
    for _, patterns in stages:
        field_out = optics.apply_pattern_set(field_out, patterns)
    m_max = min(spec.coupling_range * spec.tau + 2,
                _nyquist_mode_limit(grid.pitch_mm, grid.bz_length_mm))
    modes = optics.far_field(field_out, grid.bz_length_mm, m_max=m_max)
    optics_dist = modes.distribution()

    oracle_dist = distribution(evolve(state0, spec))
    sim = analysis.similarity(optics_dist, oracle_dist)

    dataio.write_distribution(optics_dist, out / "optics_distribution.csv")
    dataio.write_distribution(oracle_dist, out / "oracle_distribution.csv")

    camera_kwargs = dict(
        spot_spacing_px=_get(cfg, "camera", "spot_spacing_px", 12, int),
        spot_sigma_px=_get(cfg, "camera", "spot_sigma_px", 1.2, float),
        noise_floor=_get(cfg, "camera", "noise_floor", 0.0, float),
        rng=np.random.default_rng(seed if seed is not None else 0),
    )
    optics.write_pgm16(optics.render_camera(modes, **camera_kwargs),
                       out / "camera.pgm")
    # off-state calibration frame: full-wave plates act as identity, so the
    # input beam itself lands entirely in the m=0 spot
    off_modes = optics.far_field(beam, grid.bz_length_mm, m_max=4)
    optics.write_pgm16(optics.render_camera(off_modes, **camera_kwargs),
                       out / "camera_off.pgm")

    report = {"similarity": sim, "protocol": spec.fingerprint(),
              "n_stages": len(stages), "polarization_phi": phi,
              "n_modes": int(2 * m_max + 1)}
    if _get_bool(cfg, "simulate", "misalignment", False):
        study = optics.misalignment_study(
            [p for _, p in stages], state0.amplitudes[:, 0],
            repeats=_get(cfg, "simulate", "misalignment_repeats", 4, int),
            offset_scale_mm=_get(cfg, "simulate", "misalignment_offset_um",
                                 20.0, float) * 1e-3,
            seed=seed if seed is not None else 0, m_max=m_max,
            waist_mm=waist, window_mm=window, pitch_mm=grid.pitch_mm,
            wavelength_nm=wavelength)
        dataio.write_distribution(study.mean, out / "misaligned_distribution.csv")
        report["misalignment_max_mse"] = float(study.mse.max())
    _write_json(report, out / "similarity.json")
    plots.plot_distributions({"optics": optics_dist, "oracle": oracle_dist},
                             str(out / "distributions.svg"),
                             title=f"{spec.family}, tau={spec.tau}, "
                                   f"similarity {sim:.6f}")
    print(f"similarity vs oracle: {sim:.6f}")
    if sim < 0.999:
        print("numerical verification failure: similarity below 0.999",
              file=sys.stderr)
        if not force:
            return EXIT_NUMERICAL
    return EXIT_OK


def cmd_entropy(cfg, out: Path, seed, force: bool, n_stages: int) -> int:
    family = _get(cfg, "entropy", "family", "U3")
    tau = _get(cfg, "entropy", "tau", None, int)
    n_phis = _get(cfg, "entropy", "n_phis", 10, int)
    n_real = _get(cfg, "entropy", "n_realizations", 10, int)
    center = _get(cfg, "entropy", "delta_center", np.pi, parse_angle)
    half_width = _get(cfg, "entropy", "half_width", None, parse_angle)
    base_seed = seed if seed is not None else 0

    phis = 2 * np.pi * np.arange(n_phis) / n_phis
    coins = analysis.linear_inputs(n_phis)
    mean, stderr = analysis.entropy_input_sweep(
        family, tau, coins, delta_center=center, half_width=half_width,
        n_realizations=n_real, seed=base_seed)
    dataio.write_phi_sweep(phis, mean, stderr, out / "entropy_phi.csv")
    plots.plot_entropy_inputs(phis, mean, stderr, str(out / "entropy_phi.svg"),
                              title=f"{family}, tau={tau}, "
                                    f"{n_real} realizations")

    rhos = {}
    for phi in phis:
        state = evolve(linear_polarization_input(float(phi)),
                       ProtocolSpec.disordered(family, tau, base_seed,
                                               center, half_width))
        rho = analysis.reduced_density_matrix(state)
        rhos[f"{phi:.12g}"] = {"re": np.real(rho).tolist(),
                               "im": np.imag(rho).tolist(),
                               "entropy": analysis.von_neumann_entropy(rho)}
    _write_json(rhos, out / "density_matrices.json")

    if _get_bool(cfg, "entropy", "curve", False):
        n_inputs = _get(cfg, "entropy", "curve_n_inputs", 100, int)
        stride = _get(cfg, "entropy", "curve_tau_stride", 8, int)
        taus = list(range(0, tau + 1, stride))
        if taus[-1] != tau:
            taus.append(tau)
        coins_curve = analysis.linear_inputs(n_inputs)
        disordered = analysis.entropy_dynamics(
            family, tau, coins_curve, delta_center=center,
            half_width=half_width, n_realizations=n_real,
            seed=base_seed, taus=taus)
        ordered = analysis.entropy_dynamics(
            family, tau, coins_curve, delta_center=center,
            half_width=0.0, taus=taus)
        dataio.write_entropy_curve(disordered, out / "entropy_tau_disordered.csv")
        dataio.write_entropy_curve(ordered, out / "entropy_tau_ordered.csv")
        plots.plot_entropy_curve(disordered, str(out / "entropy_tau.svg"),
                                 title=f"{family} disordered ensemble")
    min_mean = float(mean.min())
    print(f"ensemble-mean entropy over inputs: min {min_mean:.4f}, "
          f"max {float(mean.max()):.4f}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qwplates",
        description="Compile quantum-walk protocols into patterned-waveplate "
                    "profiles and simulate their optical realization.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("compile", cmd_compile), ("simulate", cmd_simulate),
                     ("entropy", cmd_entropy)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--force", action="store_true",
                       help="continue past feasibility/verification failures")
        p.add_argument("--stages", type=int, default=1)
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return args.fn(cfg, out, args.seed, args.force, args.stages)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
