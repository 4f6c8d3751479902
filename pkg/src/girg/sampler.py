"""Expected linear-time GIRG sampling and the quadratic reference sampler."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ModelConfigurationError, UsageError
from .geometry import cell_level_for_volume, torus_distances
from .graph import Graph, sort_edges
from .model import GirgParams, WeightSequence, edge_probabilities

# substream tags for the master seed
STREAM_POSITIONS = 1
STREAM_WEIGHTS = 2
STREAM_EDGES = 3
STREAM_NAIVE = 4


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *key]))


def substream_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([int(seed), *key]).generate_state(1)[0])


def geometric_variate(p: float, rng: np.random.Generator) -> int:
    """Number of Bernoulli(p) trials up to and including the first success."""
    if not (0.0 < p <= 1.0):
        raise UsageError(f"p must lie in (0, 1], got {p!r}")
    if p == 1.0:
        return 1
    r = 0.0
    while r == 0.0:
        r = rng.random()
    return max(1, math.ceil(math.log(r) / math.log1p(-p)))


@dataclass(frozen=True)
class WeightLayers:
    """Vertices bucketed by weight into doubling bands ``[w0 2^(i-1), w0 2^i)``.

    ``layer_of[v]`` is the 0-based band of vertex v; band ``i`` here is layer
    ``i + 1`` with upper boundary ``upper[i] = w0 * 2^(i+1)``.
    """

    w0: float
    layer_of: np.ndarray
    members: list = field(repr=False)

    @property
    def L(self) -> int:
        return len(self.members)

    @property
    def boundaries(self) -> np.ndarray:
        return self.w0 * 2.0 ** np.arange(self.L + 1)

    @property
    def upper(self) -> np.ndarray:
        return self.boundaries[1:]


def build_weight_layers(ws: WeightSequence) -> WeightLayers:
    w = ws.weights
    w0 = ws.w_min
    k = np.floor(np.log2(w / w0)).astype(np.int64)
    np.maximum(k, 0, out=k)
    # repair log2 rounding at band edges so that w0 2^k <= w < w0 2^(k+1)
    k[np.ldexp(w0, k + 1) <= w] += 1
    k[np.ldexp(w0, k) > w] -= 1
    L = int(k.max()) + 1
    order = np.argsort(k, kind="stable")
    bounds = np.searchsorted(k[order], np.arange(L + 1))
    members = [order[bounds[i]:bounds[i + 1]] for i in range(L)]
    return WeightLayers(w0=w0, layer_of=k, members=members)


@dataclass
class EdgeModel:
    """Arrays and constants describing ``p_uv`` for the compiled sampler."""

    mode: int
    positions: np.ndarray
    weights: np.ndarray
    W: float
    alpha: float
    p_scale: float
    c_upper: float
    tau: float
    radii: np.ndarray = field(default_factory=lambda: np.zeros(0))
    angles: np.ndarray = field(default_factory=lambda: np.zeros(0))
    R: float = 0.0
    T: float = 0.0

    @property
    def threshold(self) -> bool:
        return self.mode in (_kernels.MODE_GIRG_THRESHOLD, _kernels.MODE_HRG_THRESHOLD)

    def probabilities(self, us, vs) -> np.ndarray:
        return _kernels.pair_probabilities(
            np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64), self.mode,
            self.positions, self.weights, self.W, self.alpha, self.p_scale, self.tau,
            self.radii, self.angles, self.R, self.T)


def girg_edge_model(params: GirgParams, ws: WeightSequence, positions: np.ndarray) -> EdgeModel:
    return EdgeModel(
        mode=_kernels.MODE_GIRG_THRESHOLD if params.threshold else _kernels.MODE_GIRG,
        positions=np.ascontiguousarray(positions, dtype=np.float64),
        weights=ws.weights, W=ws.total,
        alpha=0.0 if params.threshold else float(params.alpha),
        p_scale=params.p_scale, c_upper=float(params.c_upper), tau=params.tau_threshold)


@dataclass
class SampleStats:
    status: int = 0
    trials: np.ndarray | None = None
    layer_pairs: int = 0
    elapsed: float = 0.0


def _prepare(em: EdgeModel, layers: WeightLayers):
    n, d = em.positions.shape
    W = em.W
    upper = layers.upper
    L = layers.L
    order_parts, prefix_parts = [], []
    layer_start = np.zeros(L + 1, dtype=np.int64)
    prefix_start = np.zeros(L + 1, dtype=np.int64)
    layer_level = np.zeros(L, dtype=np.int64)
    for i, members in enumerate(layers.members):
        nu = min(1.0, upper[i] * layers.w0 / W)
        level = cell_level_for_volume(nu, d)
        codes = _kernels.morton_from_points(em.positions[members], level)
        order, prefix = _kernels.counting_sort(codes, 1 << (level * d))
        order_parts.append(members[order])
        prefix_parts.append(prefix)
        layer_level[i] = level
        layer_start[i + 1] = layer_start[i] + members.size
        prefix_start[i + 1] = prefix_start[i] + prefix.size
    radius_scale = max(1.0, em.tau) ** d if em.threshold else 1.0
    tasks, levels = [], []
    for i in range(L):
        if layers.members[i].size == 0:
            continue
        for j in range(i, L):
            if layers.members[j].size == 0:
                continue
            nu = min(1.0, radius_scale * upper[i] * upper[j] / W)
            tasks.append((i, j))
            levels.append(cell_level_for_volume(nu, d))
    return (np.concatenate(order_parts), layer_start, layer_level,
            np.concatenate(prefix_parts), prefix_start, upper.astype(np.float64),
            np.array(tasks, dtype=np.int64).reshape(-1, 2), np.array(levels, dtype=np.int64))


def sample_edges(em: EdgeModel, seed: int, *, threads: int = 1,
                 record_trials: bool = False, stats: SampleStats | None = None) -> np.ndarray:
    """Edge array ``(m, 2)`` (u < v, lexicographic) drawn with the fast algorithm.

    Layer pair ``(i, j)`` uses its own random substream, so the result does
    not depend on ``threads``.
    """
    n = em.positions.shape[0]
    if n < 2:
        return np.zeros((0, 2), dtype=np.int64)
    layers = build_weight_layers(WeightSequence(em.weights))
    order, layer_start, layer_level, prefix, prefix_start, upper, tasks, levels = _prepare(em, layers)
    seeds = np.array([substream_seed(seed, STREAM_EDGES, i, j) for i, j in tasks], dtype=np.int64)

    spos = np.ascontiguousarray(em.positions[order])
    sw = np.ascontiguousarray(em.weights[order])
    srad = np.ascontiguousarray(em.radii[order]) if em.radii.size else em.radii
    sang = np.ascontiguousarray(em.angles[order]) if em.angles.size else em.angles

    def run(sel):
        return _kernels.sample_tasks(
            tasks[sel], seeds[sel], levels[sel], em.mode, spos, sw, em.W,
            em.alpha, em.p_scale, em.c_upper, em.tau, srad, sang, em.R, em.T,
            order, layer_start, layer_level, prefix, prefix_start, upper, record_trials)

    if threads <= 1 or len(tasks) < 2:
        results = [run(np.arange(len(tasks)))]
    else:
        chunks = [np.arange(k, len(tasks), threads) for k in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, chunks))

    parts, trial_parts = [], []
    for edges, n_edges, trials, n_trials, status, info in results:
        if status != _kernels.STATUS_OK:
            if stats is not None:
                stats.status = status
            u, v, p, pbar = info
            raise ModelConfigurationError(
                f"edge probability {p:.6g} of pair ({int(u)}, {int(v)}) exceeds the "
                f"sampling bound {pbar:.6g}; increase c_upper")
        parts.append(edges[:n_edges])
        trial_parts.append(trials[:n_trials])
    edges = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
    edges = sort_edges(edges, n)
    if stats is not None:
        stats.layer_pairs = len(tasks)
        if record_trials:
            stats.trials = np.concatenate(trial_parts)
    return edges


def sample_positions(n: int, d: int, seed: int) -> np.ndarray:
    return substream(seed, STREAM_POSITIONS).random((n, d))


def sample_girg(params: GirgParams, ws: WeightSequence, seed: int = 0, *,
                threads: int = 1, stats: SampleStats | None = None) -> tuple[np.ndarray, Graph]:
    """Positions uniform on the torus and a graph with the GIRG edge law."""
    n = len(ws)
    t0 = time.perf_counter()
    positions = sample_positions(n, params.d, seed)
    edges = sample_edges(girg_edge_model(params, ws, positions), seed, threads=threads, stats=stats)
    g = Graph(n, edges, validate=False)
    if stats is not None:
        stats.elapsed = time.perf_counter() - t0
    return positions, g


def sample_girg_naive(params: GirgParams, ws: WeightSequence, positions: np.ndarray,
                      rng: np.random.Generator) -> Graph:
    """One independent coin per unordered pair; quadratic time and memory."""
    positions = np.asarray(positions, dtype=np.float64)
    n = len(ws)
    if positions.shape != (n, params.d):
        raise UsageError("positions must be an (n, d) array matching the weights")
    us, vs = np.triu_indices(n, k=1)
    w = ws.weights
    r = torus_distances(positions[us], positions[vs])
    p = edge_probabilities(w[us] * w[vs], r, ws.total, params)
    keep = rng.random(us.size) < p
    return Graph(n, np.column_stack([us[keep], vs[keep]]), validate=False)


@dataclass(frozen=True)
class RuntimeRow:
    n: int
    seconds: float
    edges: int

    @property
    def edges_per_vertex(self) -> float:
        return self.edges / self.n


def expected_runtime_probe(n_values, params: GirgParams, seed: int = 0, *,
                           weights: str = "fixed", w_min: float = 1.0, repeats: int = 3,
                           threads: int = 1) -> tuple[list[RuntimeRow], list[float]]:
    """Time :func:`sample_girg` over increasing ``n``; returns rows and time ratios.

    Each row keeps the fastest of ``repeats`` runs (weights are generated
    outside the timed region).
    """
    from .model import make_weights_fixed, sample_weights

    n_values = [int(n) for n in n_values]
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise UsageError("n values must be increasing")
    warm = make_weights_fixed(64, params.beta, w_min)
    sample_girg(params, warm, seed)
    rows = []
    for n in n_values:
        if weights == "fixed":
            ws = make_weights_fixed(n, params.beta, w_min)
        else:
            ws = sample_weights(n, params.beta, w_min, substream(seed, STREAM_WEIGHTS))
        best, m = math.inf, 0
        for _ in range(repeats):
            t0 = time.perf_counter()
            _, g = sample_girg(params, ws, seed, threads=threads)
            best = min(best, time.perf_counter() - t0)
            m = g.m
        rows.append(RuntimeRow(n, best, m))
    ratios = [b.seconds / a.seconds for a, b in zip(rows, rows[1:])]
    return rows, ratios
