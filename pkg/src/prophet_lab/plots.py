"""File-output figure rendering for sweep curves and optimizer objectives.

matplotlib is forced onto the Agg backend: rendering always goes to a file,
never to a display, so the CLI stays usable on headless machines.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .errors import ConfigurationError

_CURVE_STYLE = {
    "rpi_lower": dict(color="tab:blue", label="rank-policy lower bound"),
    "wai_upper": dict(color="tab:red", label="waiting-policy upper bound"),
}


def render_sweep(rows: list[tuple[float, str, float, float]], path: str) -> str:
    """Plot value against lambda for every curve present in the sweep rows."""
    if not rows:
        raise ConfigurationError("nothing to plot: sweep produced no rows")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    curves = sorted({r[1] for r in rows})
    for curve in curves:
        pts = [(lam, value) for lam, c, _, value in rows if c == curve]
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        style = _CURVE_STYLE.get(curve, dict(label=curve))
        ax.plot(xs, ys, linewidth=1.8, **style)
    ax.set_xlabel("lambda")
    ax.set_ylabel("optimal value")
    ax.set_title("Best achievable two-phase performance by phase weighting")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_objective(xs, ys, x_star: float, f_star: float, title: str, path: str) -> str:
    """Plot one x-objective with its located maximum marked."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(xs, ys, color="tab:blue", linewidth=1.8)
    ax.plot([x_star], [f_star], marker="o", color="tab:red", zorder=5)
    ax.annotate(
        f"x*={x_star:.4f}\nf*={f_star:.4f}",
        xy=(x_star, f_star),
        xytext=(10, -20),
        textcoords="offset points",
        fontsize=9,
    )
    ax.set_xlabel("observation fraction x")
    ax.set_ylabel("value")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
