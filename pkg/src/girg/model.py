"""GIRG parameters, power-law weight sequences and the edge probability."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import UsageError
from .geometry import torus_distance

INFINITY = math.inf


@dataclass(frozen=True)
class GirgParams:
    """Model constants.

    ``p_scale`` replaces the Theta in the edge probability; ``c_upper`` is
    the constant the sampler uses for its probability upper bound and must
    dominate ``p_scale``.  ``tau_threshold`` is the connection radius
    multiplier used only when ``alpha`` is infinite.
    """

    d: int = 1
    alpha: float = 2.0
    beta: float = 2.5
    p_scale: float = 1.0
    c_upper: float | None = None
    tau_threshold: float = 1.0

    def __post_init__(self):
        if self.c_upper is None:
            object.__setattr__(self, "c_upper", self.p_scale)
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise UsageError(f"d must be a positive integer, got {self.d!r}")
        if not (self.alpha > 1.0):
            raise UsageError(f"alpha must exceed 1 (or be inf), got {self.alpha!r}")
        if not (self.beta > 2.0):
            raise UsageError(f"beta must exceed 2, got {self.beta!r}")
        if not (self.p_scale > 0.0):
            raise UsageError("p_scale must be positive")
        if not (self.c_upper >= self.p_scale):
            raise UsageError("c_upper must be at least p_scale")
        if not (self.tau_threshold > 0.0):
            raise UsageError("tau_threshold must be positive")

    @property
    def threshold(self) -> bool:
        return math.isinf(self.alpha)


@dataclass(frozen=True)
class WeightSequence:
    weights: np.ndarray
    total: float = field(init=False)
    w_min: float = field(init=False)

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise UsageError("a weight sequence needs at least one weight")
        if not np.all(w > 0) or not np.all(np.isfinite(w)):
            raise UsageError("weights must be positive and finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "total", float(w.sum()))
        object.__setattr__(self, "w_min", float(w.min()))

    def __len__(self):
        return self.weights.size

    @property
    def w_max(self) -> float:
        return float(self.weights.max())

    def save(self, path: str | Path) -> None:
        np.savetxt(path, self.weights, fmt="%.17g")

    @classmethod
    def load(cls, path: str | Path) -> "WeightSequence":
        return cls(np.atleast_1d(np.loadtxt(path, dtype=np.float64)))


def make_weights_fixed(n: int, beta: float, delta: float = 1.0) -> WeightSequence:
    """``w_v = delta * (n / v) ** (1 / (beta - 1))`` for ``v = 1..n``."""
    if n < 1:
        raise UsageError("n must be at least 1")
    if not beta > 2:
        raise UsageError("beta must exceed 2")
    if not delta > 0:
        raise UsageError("delta must be positive")
    v = np.arange(1, n + 1, dtype=np.float64)
    return WeightSequence(delta * (n / v) ** (1.0 / (beta - 1.0)))


def pareto_quantile(u, beta: float, w_min: float):
    """Inverse of ``F(z) = 1 - (z / w_min) ** (1 - beta)``."""
    return w_min * (1.0 - np.asarray(u, dtype=np.float64)) ** (1.0 / (1.0 - beta))


def sample_weights(n: int, beta: float, w_min: float, rng: np.random.Generator) -> WeightSequence:
    if n < 1:
        raise UsageError("n must be at least 1")
    if not beta > 2:
        raise UsageError("beta must exceed 2")
    if not w_min > 0:
        raise UsageError("w_min must be positive")
    return WeightSequence(pareto_quantile(rng.random(n), beta, w_min))


def edge_probability(w_u: float, w_v: float, x_u: Sequence[float], x_v: Sequence[float],
                     W: float, params: GirgParams) -> float:
    r = torus_distance(x_u, x_v)
    return float(edge_probabilities(np.array([w_u * w_v]), np.array([r]), W, params)[0])


def edge_probabilities(wprod: np.ndarray, r: np.ndarray, W: float, params: GirgParams) -> np.ndarray:
    """Vectorised edge probability from weight products and distances."""
    wprod = np.asarray(wprod, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    d = params.d
    if params.threshold:
        radius = params.tau_threshold * (wprod / W) ** (1.0 / d)
        return np.where(r < radius, min(params.p_scale, 1.0), 0.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        base = wprod / (W * r ** d)
        p = params.p_scale * base ** params.alpha
    p = np.where(r == 0.0, 1.0, p)
    return np.minimum(p, 1.0)


def edge_probability_bound(wprod: np.ndarray, r: np.ndarray, W: float, params: GirgParams) -> np.ndarray:
    """The sampler's assumed upper bound on the edge probability."""
    wprod = np.asarray(wprod, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    d = params.d
    if params.threshold:
        radius = params.tau_threshold * (wprod / W) ** (1.0 / d)
        return np.where(r < radius, 1.0, 0.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        p = params.c_upper * (wprod / (W * r ** d)) ** params.alpha
    p = np.where(r == 0.0, 1.0, p)
    return np.minimum(p, 1.0)


@dataclass(frozen=True)
class PowerLawReport:
    ok: bool
    worst_ratio_low: float
    worst_ratio_high: float
    lower_range: tuple[float, float]
    upper_range: tuple[float, float]
    note: str = ("finite-n proxy: lower bound scanned up to (n/log^2 n)^(1/(beta-1)), "
                 "upper bound up to n^(1/(beta-1))")


def tail_counts(weights: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """``#{v : w_v >= t}`` for every threshold ``t``."""
    s = np.sort(np.asarray(weights, dtype=np.float64))
    return s.size - np.searchsorted(s, thresholds, side="left")


def verify_power_law(ws: WeightSequence, beta: float, eta: float,
                     c1: float = 0.1, c2: float = 10.0) -> PowerLawReport:
    """Check the two-sided tail-count condition on a factor-2 threshold grid.

    The lower bound ``count >= c1 n w^(1-beta-eta)`` is only required up to a
    cutoff ``w_bar = (n / log^2 n)^(1/(beta-1))``; the upper bound
    ``count <= c2 n w^(1-beta+eta)`` is checked on the whole grid up to
    ``n^(1/(beta-1))``.
    """
    if not eta > 0:
        raise UsageError("eta must be positive")
    w = ws.weights
    n = w.size
    top = max(n ** (1.0 / (beta - 1.0)), ws.w_min)
    grid = ws.w_min * 2.0 ** np.arange(0, max(1, int(math.floor(math.log2(top / ws.w_min))) + 1))
    counts = tail_counts(w, grid).astype(np.float64)

    high = counts / (n * grid ** (1.0 - beta + eta))
    log_n = math.log(n) if n > 1 else 1.0
    w_bar = max((n / max(log_n ** 2, 1.0)) ** (1.0 / (beta - 1.0)), ws.w_min)
    low_grid = grid <= w_bar
    low = counts[low_grid] / (n * grid[low_grid] ** (1.0 - beta - eta))

    worst_low = float(low.min())
    worst_high = float(high.max())
    return PowerLawReport(
        ok=bool(worst_low >= c1 and worst_high <= c2),
        worst_ratio_low=worst_low,
        worst_ratio_high=worst_high,
        lower_range=(float(grid[0]), float(grid[low_grid][-1])),
        upper_range=(float(grid[0]), float(grid[-1])),
    )


def partial_weight_sum_above(ws: WeightSequence, w: float) -> float:
    x = ws.weights
    return float(x[x >= w].sum())
