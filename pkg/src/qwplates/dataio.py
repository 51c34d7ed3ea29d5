"""Tabular I/O for site distributions and entropy curves (plain CSV)."""

from __future__ import annotations

import numpy as np

from .analysis import EntropyCurve
from .lattice import ProbabilityDistribution


def write_distribution(dist: ProbabilityDistribution, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("m,P\n")
        for m, p in zip(dist.sites, dist.p):
            fh.write(f"{m},{p:.12g}\n")


def read_distribution(path) -> ProbabilityDistribution:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    sites = data[:, 0].astype(int)
    if sites[0] != -sites[-1] or not np.all(np.diff(sites) == 1):
        raise ValueError("distribution file must cover a symmetric contiguous range")
    return ProbabilityDistribution(data[:, 1], int(sites[-1]))


def write_entropy_curve(curve: EntropyCurve, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("tau,mean_entropy,stderr\n")
        for t, m, s in zip(curve.taus, curve.mean, curve.stderr):
            fh.write(f"{t},{m:.12g},{s:.12g}\n")


def write_phi_sweep(phis: np.ndarray, mean: np.ndarray, stderr: np.ndarray, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("phi,mean_entropy,stderr\n")
        for f, m, s in zip(phis, mean, stderr):
            fh.write(f"{f:.12g},{m:.12g},{s:.12g}\n")
