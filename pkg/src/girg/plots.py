"""Report figures written to image files (no display needed)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_degree_distribution(degrees, path: str | Path, *, beta: float | None = None,
                             k_min: int | None = None) -> Path:
    """Complementary CDF of the degrees on log-log axes."""
    deg = np.asarray(degrees)
    deg = np.sort(deg[deg > 0])
    fig, ax = plt.subplots(figsize=(5, 4))
    if deg.size:
        ks, first = np.unique(deg, return_index=True)
        ccdf = 1.0 - first / deg.size
        ax.loglog(ks, ccdf, ".", ms=3, label="degrees")
        if beta is not None:
            k0 = k_min or ks[0]
            c0 = ccdf[np.searchsorted(ks, k0)] if k0 <= ks[-1] else ccdf[-1]
            grid = np.geomspace(k0, ks[-1], 50)
            ax.loglog(grid, c0 * (grid / k0) ** (1.0 - beta), "-", lw=1,
                      label=f"slope {1.0 - beta:.2f}")
    ax.set_xlabel("degree k")
    ax.set_ylabel("P(deg >= k)")
    ax.legend(loc="lower left")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_bench(ns, seconds, path: str | Path) -> Path:
    """Wall time against n with a linear reference through the first point."""
    ns = np.asarray(ns, dtype=np.float64)
    seconds = np.asarray(seconds, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(ns, seconds, "o-", label="measured")
    if ns.size:
        ax.loglog(ns, seconds[0] * ns / ns[0], "--", lw=1, label="linear")
    ax.set_xlabel("n")
    ax.set_ylabel("seconds")
    ax.legend(loc="upper left")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
