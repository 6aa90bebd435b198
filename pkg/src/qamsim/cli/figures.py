"""Figure rendering for the CLI report path.

Each data product gets a PNG rendered next to it; figures are a
convenience layer over the CSV/grid files (which stay the byte-exact
record) and every command accepts --no-figures to skip them.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

DPI = 150


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return Path(path)


def momentum_figure(path: Path, hists: dict) -> Path:
    """Momentum distributions at the snapshot kicks, log scale."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for t in sorted(hists):
        h = hists[t]
        mass = np.where(h.mass > 0, h.mass, np.nan)
        ax.semilogy(h.centers, mass, lw=1.0, label=f"t={t}")
    ax.set_xlabel("momentum (recoil units)")
    ax.set_ylabel("probability per bin")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def trajectory_figure(path: Path, kicks: np.ndarray, mean_p: np.ndarray) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(kicks, mean_p, lw=1.2)
    ax.set_xlabel("kick")
    ax.set_ylabel("mean momentum (recoil units)")
    fig.tight_layout()
    return _save(fig, path)


def scan_tau_figure(
    path: Path,
    tau_values: np.ndarray,
    centers: np.ndarray,
    density: np.ndarray,
    curves: list,
) -> Path:
    """Stacked momentum distributions vs tau with overlay mode curves.

    `curves` is a list of ((r, s, j), momentum array) pairs.
    """
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    with np.errstate(divide="ignore"):
        img = np.log10(np.where(density > 0, density, np.nan))
    ax.imshow(
        img,
        origin="lower",
        aspect="auto",
        extent=(centers[0], centers[-1], tau_values[0], tau_values[-1]),
        cmap="viridis",
    )
    for (r, s, j), curve in curves:
        ax.plot(curve, tau_values, "w-", lw=1.0, label=f"({r},{s}) j={j}")
    if curves:
        ax.legend(loc="best", fontsize=7)
    ax.set_xlim(centers[0], centers[-1])
    ax.set_ylim(tau_values[0], tau_values[-1])
    ax.set_xlabel("momentum (recoil units)")
    ax.set_ylabel("kick period / 2π")
    fig.tight_layout()
    return _save(fig, path)


def portrait_figure(path: Path, cloud: np.ndarray, orbits: list) -> Path:
    """Phase portrait point cloud with any located periodic orbits."""
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    pts = cloud.reshape(-1, 2)
    ax.plot(pts[:, 0], pts[:, 1], ",", color="0.25", alpha=0.5)
    for orb in orbits:
        marker = "o" if orb.stable else "x"
        ax.plot(orb.thetas, orb.actions, marker, ms=6, mew=1.5,
                label=f"({orb.r},{orb.s}) R={orb.residue:.3f}")
    if orbits:
        ax.legend(loc="upper right", fontsize=7)
    ax.set_xlim(-math.pi, math.pi)
    ax.set_ylim(-math.pi, math.pi)
    ax.set_xlabel("angle")
    ax.set_ylabel("J")
    fig.tight_layout()
    return _save(fig, path)


def bands_figure(path: Path, per_k: list) -> Path:
    """Eigenphase bands for each kick strength; one panel per k.

    `per_k` is a list of (k, theta, omega[q, M]) tuples.
    """
    n = len(per_k)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.6), squeeze=False)
    for ax, (k, theta, omega) in zip(axes[0], per_k):
        for j in range(omega.shape[0]):
            ax.plot(theta, omega[j] % (2.0 * math.pi), ".", ms=1.0, label=f"j={j}")
        ax.set_title(f"k={k:g}", fontsize=9)
        ax.set_xlabel("fiber angle")
        ax.set_xlim(-math.pi, math.pi)
    axes[0][0].set_ylabel("eigenphase")
    fig.tight_layout()
    return _save(fig, path)


def farey_figure(path: Path, records: list) -> Path:
    """Distance of each winding number to the nearest integer."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    qs = [rec.q for rec in records]
    dist = [rec.frac_distance for rec in records]
    vis = [rec.visible for rec in records]
    for qq, dd, vv in zip(qs, dist, vis):
        ax.plot([qq], [dd], "o", color="tab:green" if vv else "tab:red")
        ax.annotate(f"{dd:.4f}", (qq, dd), fontsize=7,
                    textcoords="offset points", xytext=(4, 4))
    ax.axhline(0.25, color="0.5", ls="--", lw=0.8)
    ax.set_xlabel("q")
    ax.set_ylabel("distance of bare winding number to nearest integer")
    ax.set_ylim(-0.02, 0.55)
    fig.tight_layout()
    return _save(fig, path)


def husimi_figure(path: Path, panels: list) -> Path:
    """Phase-space density panels; one per snapshot kick.

    `panels` is a list of (t, theta, action, grid[nI, ntheta]) tuples.
    """
    n = len(panels)
    fig, axes = plt.subplots(1, n, figsize=(3.4 * n, 3.2), squeeze=False)
    for ax, (t, theta, action, grid) in zip(axes[0], panels):
        ax.imshow(
            grid,
            origin="lower",
            aspect="auto",
            extent=(theta[0], theta[-1], action[0], action[-1]),
            cmap="magma",
        )
        ax.set_title(f"t={t}", fontsize=9)
        ax.set_xlabel("angle")
    axes[0][0].set_ylabel("action")
    fig.tight_layout()
    return _save(fig, path)


def beta_scan_figure(
    path: Path, betas: np.ndarray, probs: np.ndarray, predictions: list
) -> Path:
    """Trapped probability vs quasimomentum with predicted peak positions."""
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.plot(betas, probs, "-", lw=1.2)
    for nu, n, b in predictions:
        ax.axvline(b, color="tab:orange", lw=0.8, alpha=0.7)
    ax.set_xlabel("quasimomentum")
    ax.set_ylabel("boxed probability")
    ax.set_xlim(betas[0], betas[-1])
    fig.tight_layout()
    return _save(fig, path)
