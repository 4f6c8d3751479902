"""Hyperbolic random graphs, their GIRG embedding and the fast sampling path.

Points live in a hyperbolic disk of radius ``R = 2 ln n + C_H``.  A point
``(r, phi)`` maps to the one-dimensional GIRG vertex with weight
``exp((R - r) / 2)`` and position ``phi / 2pi``; the map is a bijection, and
the edge probability of the hyperbolic model, read through its inverse, is a
GIRG edge probability with ``alpha = 1 / T_H`` and ``beta = 2 alpha_H + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from . import _kernels
from .errors import ModelConfigurationError, UsageError
from .graph import Graph
from .model import GirgParams, INFINITY, WeightSequence
from .sampler import (
    STREAM_EDGES,
    STREAM_POSITIONS,
    STREAM_WEIGHTS,
    EdgeModel,
    SampleStats,
    sample_edges,
    substream,
    substream_seed,
)

TWO_PI = 2.0 * math.pi
# cosh/sinh arguments beyond this lose the double range margin we rely on
MAX_TRIG_ARGUMENT = 700.0
MAX_DOUBLINGS = 10
C_UPPER_SLACK = 16.0
# relative widening of the threshold radius, absorbing rounding at d = R
TAU_SLACK = 1e-9
STREAM_RETRY = 5


@dataclass(frozen=True)
class HyperbolicParams:
    """``alpha_H`` controls the radial density, ``T_H`` the temperature.

    ``T_H = 0`` is the threshold model (an edge iff the distance is at most
    ``R``).  Passing ``R`` explicitly checks it against ``2 ln n + C_H``.
    """

    alpha_H: float
    C_H: float
    T_H: float
    n: int
    R: float | None = None

    def __post_init__(self):
        if not self.alpha_H > 0.5:
            raise UsageError(f"alpha_H must exceed 1/2, got {self.alpha_H!r}")
        if not self.T_H >= 0.0:
            raise UsageError(f"T_H must be non-negative, got {self.T_H!r}")
        if int(self.n) != self.n or self.n < 1:
            raise UsageError(f"n must be a positive integer, got {self.n!r}")
        R = 2.0 * math.log(self.n) + self.C_H
        if self.R is not None and not math.isclose(self.R, R, rel_tol=1e-12, abs_tol=1e-12):
            raise UsageError(f"R={self.R!r} does not equal 2 ln n + C_H = {R!r}")
        if not R > 0.0:
            raise UsageError("2 ln n + C_H must be positive")
        if self.alpha_H * R > MAX_TRIG_ARGUMENT:
            raise UsageError("alpha_H * R is outside the supported double range")
        object.__setattr__(self, "R", R)

    @property
    def threshold(self) -> bool:
        return self.T_H == 0.0

    @property
    def beta(self) -> float:
        return 2.0 * self.alpha_H + 1.0

    @property
    def alpha(self) -> float:
        return INFINITY if self.threshold else 1.0 / self.T_H


@dataclass(frozen=True)
class PolarPoint:
    r: float
    phi: float

    def __post_init__(self):
        if not (self.r >= 0.0 and math.isfinite(self.r)):
            raise UsageError(f"radius must be finite and non-negative, got {self.r!r}")
        if not (0.0 <= self.phi < TWO_PI):
            raise UsageError(f"angle must lie in [0, 2pi), got {self.phi!r}")


@dataclass(frozen=True)
class PolarPoints:
    """Columnar storage of ``n`` polar points."""

    r: np.ndarray
    phi: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.ascontiguousarray(self.r, dtype=np.float64)
        phi = np.ascontiguousarray(self.phi, dtype=np.float64)
        if r.ndim != 1 or r.shape != phi.shape:
            raise UsageError("radii and angles must be 1-d arrays of equal length")
        if r.size and (r.min() < 0.0 or phi.min() < 0.0 or phi.max() >= TWO_PI):
            raise UsageError("polar coordinates out of range")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_points(cls, points) -> "PolarPoints":
        pts = list(points)
        return cls(np.array([p.r for p in pts]), np.array([p.phi for p in pts]))

    def __len__(self):
        return self.r.size

    def __getitem__(self, k: int) -> PolarPoint:
        return PolarPoint(float(self.r[k]), float(self.phi[k]))

    def __iter__(self):
        return (self[k] for k in range(len(self)))


def _as_points(points) -> PolarPoints:
    return points if isinstance(points, PolarPoints) else PolarPoints.from_points(points)


def radius_quantile(u, hp: HyperbolicParams):
    """Inverse CDF of the radial density ``alpha sinh(alpha r) / (cosh(alpha R) - 1)``."""
    a = hp.alpha_H
    u = np.asarray(u, dtype=np.float64)
    return np.arccosh(1.0 + u * (math.cosh(a * hp.R) - 1.0)) / a


def radius_cdf(r, hp: HyperbolicParams):
    a = hp.alpha_H
    return (np.cosh(a * np.asarray(r, dtype=np.float64)) - 1.0) / (math.cosh(a * hp.R) - 1.0)


def sample_radius(hp: HyperbolicParams, rng: np.random.Generator) -> float:
    return float(radius_quantile(rng.random(), hp))


def sample_radii(hp: HyperbolicParams, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` radii; the null event ``r = 0`` is redrawn."""
    r = radius_quantile(rng.random(size), hp)
    while True:
        zero = r == 0.0
        if not zero.any():
            return np.minimum(r, hp.R)
        r[zero] = radius_quantile(rng.random(int(zero.sum())), hp)


def sample_points(hp: HyperbolicParams, seed: int) -> PolarPoints:
    """Radii first, then angles, each from its own substream of ``seed``."""
    r = sample_radii(hp, hp.n, substream(seed, STREAM_WEIGHTS))
    phi = substream(seed, STREAM_POSITIONS).random(hp.n) * TWO_PI
    return PolarPoints(r, phi)


def cosh_distance(r1, phi1, r2, phi2):
    """``cosh`` of the hyperbolic distance, in the cancellation-free form."""
    r1 = np.asarray(r1, dtype=np.float64)
    r2 = np.asarray(r2, dtype=np.float64)
    dphi = np.asarray(phi1, dtype=np.float64) - np.asarray(phi2, dtype=np.float64)
    c = np.cosh(r1 - r2) + (1.0 - np.cos(dphi)) * (np.sinh(r1) * np.sinh(r2))
    return np.maximum(c, 1.0)


def hyperbolic_distances(r1, phi1, r2, phi2):
    return np.arccosh(cosh_distance(r1, phi1, r2, phi2))


def hyperbolic_distance(p: PolarPoint, q: PolarPoint) -> float:
    if p.r < 0.0 or q.r < 0.0:
        raise UsageError("radii must be non-negative")
    return float(hyperbolic_distances(p.r, p.phi, q.r, q.phi))


def connection_probabilities(dist, hp: HyperbolicParams):
    dist = np.asarray(dist, dtype=np.float64)
    if hp.threshold:
        return (dist <= hp.R).astype(np.float64)
    # 1 / (1 + e^z) written to avoid overflow for large z
    z = (dist - hp.R) / (2.0 * hp.T_H)
    return np.where(z > 0, np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))),
                    1.0 / (1.0 + np.exp(-np.abs(z))))


def connection_prob(dist: float, hp: HyperbolicParams) -> float:
    if not dist >= 0.0:
        raise UsageError("distance must be non-negative")
    return float(connection_probabilities(dist, hp))


def hrg_edges_naive(hp: HyperbolicParams, points, rng: np.random.Generator) -> Graph:
    """One coin per unordered pair with the native hyperbolic probability."""
    pts = _as_points(points)
    n = len(pts)
    us, vs = np.triu_indices(n, k=1)
    dist = hyperbolic_distances(pts.r[us], pts.phi[us], pts.r[vs], pts.phi[vs])
    keep = rng.random(us.size) < connection_probabilities(dist, hp)
    return Graph(n, np.column_stack([us[keep], vs[keep]]), validate=False)


def sample_hrg_naive(hp: HyperbolicParams, rng: np.random.Generator) -> tuple[PolarPoints, Graph]:
    """Radii, then angles, then edges, all from ``rng``; quadratic time."""
    r = sample_radii(hp, hp.n, rng)
    phi = rng.random(hp.n) * TWO_PI
    pts = PolarPoints(r, phi)
    return pts, hrg_edges_naive(hp, pts, rng)


def threshold_tau(W: float, hp: HyperbolicParams) -> float:
    """Torus radius multiplier covering every pair at distance at most ``R``.

    Connected pairs satisfy ``|dphi| <= pi exp((R - r_u - r_v) / 2)``, i.e.
    torus distance at most ``(W e^{-R/2} / 2) * w_u w_v / W``.
    """
    return W * math.exp(-hp.R / 2.0) / 2.0 * (1.0 + TAU_SLACK)


def mapped_p_scale(W: float, hp: HyperbolicParams) -> float:
    """Leading constant of the GIRG form that dominates ``p_H`` far away.

    From ``e^d >= (1 - cos dphi) sinh r_u sinh r_v`` and
    ``1 - cos(2 pi x) >= 8 x^2`` one gets
    ``p_H <= (W e^{-R/2} / sqrt 2)^alpha (w_u w_v / (W x))^alpha``
    up to the ``sinh``/``e^r/2`` gap, which the sampler's slack absorbs.
    """
    return (W * math.exp(-hp.R / 2.0) / math.sqrt(2.0)) ** hp.alpha


def map_to_girg(hp: HyperbolicParams, points) -> tuple[GirgParams, WeightSequence, np.ndarray]:
    """Weights ``e^{(R-r)/2}``, positions ``phi / 2pi`` and matching GIRG constants."""
    pts = _as_points(points)
    if np.any(pts.r == 0.0):
        raise UsageError("a vertex with radius 0 cannot be mapped")
    if np.any(pts.r > hp.R):
        raise UsageError("radius exceeds R")
    ws = WeightSequence(np.exp((hp.R - pts.r) / 2.0))
    x = (pts.phi / TWO_PI).reshape(-1, 1)
    x[x >= 1.0] = 0.0
    if hp.threshold:
        params = GirgParams(d=1, alpha=INFINITY, beta=hp.beta,
                            tau_threshold=threshold_tau(ws.total, hp))
    else:
        if not hp.T_H < 1.0:
            raise ModelConfigurationError(
                f"T_H={hp.T_H} gives alpha = 1/T_H <= 1, outside the GIRG range")
        ps = mapped_p_scale(ws.total, hp)
        params = GirgParams(d=1, alpha=hp.alpha, beta=hp.beta, p_scale=ps,
                            c_upper=C_UPPER_SLACK * ps)
    return params, ws, x


def girg_to_polar(hp: HyperbolicParams, weights, positions) -> PolarPoints:
    """Inverse of :func:`map_to_girg` on the coordinates."""
    w = np.asarray(weights, dtype=np.float64)
    x = np.asarray(positions, dtype=np.float64).reshape(-1)
    return PolarPoints(hp.R - 2.0 * np.log(w), x * TWO_PI)


def hrg_edge_model(hp: HyperbolicParams, points, c_upper: float | None = None) -> EdgeModel:
    pts = _as_points(points)
    params, ws, x = map_to_girg(hp, pts)
    common = dict(positions=np.ascontiguousarray(x), weights=ws.weights, W=ws.total,
                  radii=pts.r, angles=pts.phi, R=hp.R, T=hp.T_H)
    if hp.threshold:
        return EdgeModel(mode=_kernels.MODE_HRG_THRESHOLD, alpha=0.0, p_scale=1.0,
                         c_upper=1.0, tau=params.tau_threshold, **common)
    return EdgeModel(mode=_kernels.MODE_HRG, alpha=params.alpha, p_scale=params.p_scale,
                     c_upper=params.c_upper if c_upper is None else c_upper, tau=0.0, **common)


@dataclass
class FastRunInfo:
    c_upper: float = 0.0
    doublings: int = 0


def hrg_edges_fast(hp: HyperbolicParams, points, seed: int, *, threads: int = 1,
                   info: FastRunInfo | None = None, c_upper: float | None = None) -> Graph:
    """Edges through the GIRG sampler, doubling ``c_upper`` on a bound violation.

    ``c_upper`` overrides the starting bound constant.  Each retry uses a
    fresh substream.  After ``MAX_DOUBLINGS`` doublings a
    :class:`ModelConfigurationError` is raised.
    """
    pts = _as_points(points)
    em = hrg_edge_model(hp, pts, c_upper=c_upper)
    for attempt in range(MAX_DOUBLINGS + 1):
        s = seed if attempt == 0 else substream_seed(seed, STREAM_RETRY, attempt)
        stats = SampleStats()
        try:
            edges = sample_edges(em, s, threads=threads, stats=stats)
        except ModelConfigurationError:
            em.c_upper *= 2.0
            continue
        if info is not None:
            info.c_upper = em.c_upper
            info.doublings = attempt
        return Graph(len(pts), edges, validate=False)
    raise ModelConfigurationError(
        f"sampling bound still violated after {MAX_DOUBLINGS} doublings of c_upper")


def sample_hrg_fast(hp: HyperbolicParams, seed: int = 0, *, threads: int = 1,
                    info: FastRunInfo | None = None) -> tuple[PolarPoints, Graph]:
    pts = sample_points(hp, seed)
    return pts, hrg_edges_fast(hp, pts, substream_seed(seed, STREAM_EDGES), threads=threads, info=info)


def critical_angle(r_u: float, r_v: float, hp: HyperbolicParams) -> float:
    """Angle ``phi_0 in [0, pi]`` at which the distance of the two points equals ``R``.

    Solved by bisection on the stabilised distance formula.  When every
    angle gives distance at most ``R`` the result is ``pi``.
    """
    R = hp.R
    if not (0.0 <= r_u <= R and 0.0 <= r_v <= R):
        raise UsageError("radii must lie in [0, R]")
    if r_u + r_v < R:
        raise UsageError("critical angle requires r_u + r_v >= R")
    target = math.cosh(R)
    a = math.cosh(r_u - r_v)
    b = math.sinh(r_u) * math.sinh(r_v)

    def f(phi):
        # 1 - cos(phi) = 2 sin^2(phi / 2), without cancellation near 0
        return a + 2.0 * math.sin(phi / 2.0) ** 2 * b - target

    if f(math.pi) <= 0.0:
        return math.pi
    return bisect(f, 0.0, math.pi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=400)
