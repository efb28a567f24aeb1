"""Static SVG line plots for the CLI; presentation only."""

from __future__ import annotations

import os
import tempfile

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# stable element ids and no timestamp, so reruns give identical files
matplotlib.rcParams["svg.hashsalt"] = "lifshits"


def _save(fig, path: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".svg.tmp")
    os.close(fd)
    try:
        fig.savefig(tmp, format="svg", metadata={"Date": None})
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.remove(tmp)


def plot_bounds_curve(points, limit: float, path: str):
    fig, ax = plt.subplots(figsize=(6, 4))
    t = [p.t for p in points]
    ax.semilogx(t, [p.scaled_lower for p in points], "o-", label="scaled lower bound")
    ax.semilogx(t, [p.scaled_upper for p in points], "s-", label="scaled upper bound")
    ax.axhline(limit, color="k", lw=0.8, ls="--", label=r"$-\varrho I_\infty$")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$t^{-3/\eta}\,\log$ bound")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def plot_oracle(curves: dict, path: str, target: float | None = None):
    """``curves`` maps a label to rows ``(t, neg_log_L, scaled)``."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, rows in curves.items():
        ax.semilogx([r[0] for r in rows], [r[2] for r in rows], "o-", label=label)
    if target is not None:
        ax.axhline(target, color="k", lw=0.8, ls="--", label="target")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$-\log L(t)\,/\,t^{\mu/(\mu+1)}$")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)
