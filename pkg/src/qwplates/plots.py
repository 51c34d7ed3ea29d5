"""SVG figure helpers (matplotlib, Agg backend, no display needed)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import EntropyCurve
from .compiler import PlatePatternSet
from .lattice import ProbabilityDistribution


def _save(fig, path: str) -> str:
    fig.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_patterns(patterns: PlatePatternSet, path: str) -> str:
    """Optic-axis angle of the three plates versus transverse position."""
    x = patterns.grid.x_samples_mm()
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(7, 6))
    for ax, theta, label in zip(axes, patterns.stacked().T,
                                (r"$\theta_1$", r"$\theta_2$", r"$\theta_3$")):
        ax.plot(x, np.mod(theta, np.pi) / np.pi, lw=0.7)
        ax.set_ylabel(label + r" / $\pi$")
        ax.set_ylim(-0.02, 1.02)
    axes[-1].set_xlabel("x (mm)")
    fig.suptitle(f"{patterns.protocol}, tau = {patterns.tau}")
    return _save(fig, path)


def plot_distributions(dists: dict[str, ProbabilityDistribution], path: str,
                       title: str = "") -> str:
    """Overlayed site distributions (e.g. lattice reference vs optics)."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, d in dists.items():
        ax.plot(d.sites, d.p, lw=0.9, label=label)
    ax.set_xlabel("site m")
    ax.set_ylabel("P(m)")
    if title:
        ax.set_title(title)
    ax.legend()
    return _save(fig, path)


def plot_entropy_curve(curve: EntropyCurve, path: str, title: str = "") -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(curve.taus, curve.mean, yerr=curve.stderr, fmt="o-", ms=3, lw=0.9)
    ax.set_xlabel(r"steps $\tau$")
    ax.set_ylabel(r"$\langle S \rangle$ (bits)")
    ax.set_ylim(0, 1.02)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_entropy_inputs(phis: np.ndarray, mean: np.ndarray, stderr: np.ndarray,
                        path: str, title: str = "") -> str:
    """Entropy versus input-polarization phase at fixed tau."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(phis / np.pi, mean, yerr=stderr, fmt="s-", ms=4, lw=0.9)
    ax.set_xlabel(r"input phase $\varphi/\pi$")
    ax.set_ylabel(r"$\langle S \rangle$ (bits)")
    ax.set_ylim(0, 1.02)
    if title:
        ax.set_title(title)
    return _save(fig, path)
