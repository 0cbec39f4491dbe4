"""Headless figure rendering for chain and verification reports.

Figures accompany the delimited outputs rather than replacing them: a
log-log trajectory plot with the recursive envelope and fitted rate
line, and a bound-margin plot over the verification grid. The Agg
backend keeps rendering headless, and the PNG Software tag is stripped
so repeated runs write byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .clt import ChainTrajectory, RateFit

__all__ = ["render_margins_figure", "render_trajectory_figure"]

_SAVE_KWARGS = {"dpi": 150, "metadata": {"Software": None}}
_MARGIN_FLOOR = 1e-18


def render_trajectory_figure(trajectory: ChainTrajectory, fit: RateFit | None,
                             window: tuple[int, int] | None, path) -> None:
    """Log-log chi2 trajectory with envelope and optional fitted line."""
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    n = trajectory.n.astype(float)
    positive = trajectory.chi2 > 0.0
    if positive.any():
        ax.loglog(n[positive], trajectory.chi2[positive], marker="o", markersize=2.5,
                  linewidth=1.0, label="chi2(f_n)")
    else:
        ax.text(0.5, 0.5, "chi2 identically zero", transform=ax.transAxes,
                ha="center", va="center")
    env_ok = np.isfinite(trajectory.envelope) & (trajectory.envelope > 0.0)
    if env_ok.any():
        ax.loglog(n[env_ok], trajectory.envelope[env_ok], linewidth=1.0,
                  linestyle="--", label="envelope")
    if fit is not None and window is not None:
        xs = np.linspace(float(window[0]), float(window[1]), 50)
        ax.loglog(xs, np.exp(fit.intercept) * xs**fit.slope, linewidth=1.0,
                  linestyle=":", label=f"fit slope {fit.slope:.3f}")
    ax.set_xlabel("n")
    ax.set_ylabel("chi-square distance")
    ax.set_title("Renormalized-sum trajectory")
    if positive.any() or env_ok.any():
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def render_margins_figure(records, path) -> None:
    """Bound margins over the a-grid; records are (label, a, margin) triples.

    Margins are clamped to a tiny positive floor for the log axis;
    violations (negative margins) are marked separately.
    """
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    labels = sorted({rec[0] for rec in records})
    for label in labels:
        pts = sorted((a, margin) for lab, a, margin in records if lab == label)
        xs = [p[0] for p in pts]
        ys = [max(p[1], _MARGIN_FLOOR) for p in pts]
        ax.semilogy(xs, ys, marker="o", markersize=3.0, linewidth=1.0, label=label)
        bad = [(a, _MARGIN_FLOOR) for a, margin in pts if margin < 0.0]
        if bad:
            ax.scatter([b[0] for b in bad], [b[1] for b in bad], marker="x", s=60,
                       color="red", zorder=5)
    ax.set_xlabel("a")
    ax.set_ylabel("margin (rhs - lhs)")
    ax.set_title("Bound margins")
    if labels:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
