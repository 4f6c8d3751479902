"""Structural measurements: clustering, degree tail, components, distances, grid cuts."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numba import njit
from scipy.optimize import minimize_scalar
from scipy.special import zeta

from .errors import InsufficientDataError, UsageError
from .graph import Graph

SCHEMA_VERSION = 1
MIN_TAIL_SAMPLES = 50


# ---------------------------------------------------------------- clustering

@njit(cache=True)
def _triangles_per_vertex(n, offsets, nbrs):
    """Triangles through each vertex, by intersecting degree-ordered forward lists."""
    deg = offsets[1:] - offsets[:-1]
    fcount = np.zeros(n + 1, dtype=np.int64)
    for u in range(n):
        for k in range(offsets[u], offsets[u + 1]):
            w = nbrs[k]
            if deg[u] < deg[w] or (deg[u] == deg[w] and u < w):
                fcount[u + 1] += 1
    for u in range(n):
        fcount[u + 1] += fcount[u]
    fwd = np.empty(fcount[n], dtype=np.int64)
    fill = fcount[:-1].copy()
    for u in range(n):
        for k in range(offsets[u], offsets[u + 1]):
            w = nbrs[k]
            if deg[u] < deg[w] or (deg[u] == deg[w] and u < w):
                fwd[fill[u]] = w
                fill[u] += 1
    tri = np.zeros(n, dtype=np.int64)
    for u in range(n):
        for k in range(fcount[u], fcount[u + 1]):
            w = fwd[k]
            a = fcount[u]
            b = fcount[w]
            ea = fcount[u + 1]
            eb = fcount[w + 1]
            while a < ea and b < eb:
                if fwd[a] < fwd[b]:
                    a += 1
                elif fwd[a] > fwd[b]:
                    b += 1
                else:
                    tri[u] += 1
                    tri[w] += 1
                    tri[fwd[a]] += 1
                    a += 1
                    b += 1
    return tri


def triangle_counts(g: Graph) -> np.ndarray:
    return _triangles_per_vertex(g.n, g.offsets, g.neighbors)


def local_clustering_all(g: Graph) -> np.ndarray:
    deg = g.degrees().astype(np.float64)
    wedges = deg * (deg - 1.0) / 2.0
    tri = triangle_counts(g).astype(np.float64)
    out = np.zeros(g.n)
    np.divide(tri, wedges, out=out, where=wedges > 0)
    return out


def local_clustering(g: Graph, v: int) -> float:
    """Fraction of neighbour pairs of ``v`` that are adjacent (0 below degree 2)."""
    if not 0 <= v < g.n:
        raise UsageError(f"vertex {v} out of range")
    nb = g.neighbors_of(v)
    k = nb.size
    if k < 2:
        return 0.0
    closed = 0
    for u in nb:
        closed += np.intersect1d(g.neighbors_of(int(u)), nb, assume_unique=True).size
    return (closed / 2) / (k * (k - 1) / 2)


def global_clustering(g: Graph) -> float:
    """Mean local clustering over all ``n`` vertices."""
    if g.n == 0:
        return 0.0
    return float(local_clustering_all(g).mean())


# ---------------------------------------------------------------- degree tail

def _discrete_mle(tail: np.ndarray, k_min: int) -> float:
    s = float(np.log(tail).sum())
    m = tail.size

    def nll(gamma):
        return gamma * s + m * math.log(zeta(gamma, k_min))

    res = minimize_scalar(nll, bounds=(1.0 + 1e-6, 20.0), method="bounded",
                          options={"xatol": 1e-8})
    return float(res.x)


def tail_exponent_from_degrees(degrees, k_min: int = 10) -> float:
    """Discrete maximum-likelihood exponent of ``P(k) ~ k^-gamma`` for ``k >= k_min``."""
    if k_min < 1:
        raise UsageError("k_min must be at least 1")
    deg = np.asarray(degrees, dtype=np.int64)
    tail = deg[deg >= k_min].astype(np.float64)
    if tail.size < MIN_TAIL_SAMPLES:
        raise InsufficientDataError(
            f"only {tail.size} degrees >= {k_min}; at least {MIN_TAIL_SAMPLES} are needed")
    if np.all(tail == tail[0]):
        raise InsufficientDataError("all tail degrees are equal; the exponent is not identifiable")
    est = _discrete_mle(tail, k_min)
    if est > 19.9:
        raise InsufficientDataError("tail decays faster than any power law in range")
    return est


def tail_exponent_estimate(g: Graph, k_min: int = 10) -> float:
    return tail_exponent_from_degrees(g.degrees(), k_min)


# ---------------------------------------------------------------- components

@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def _component_labels(n, edges):
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for k in range(edges.shape[0]):
        a = _find(parent, edges[k, 0])
        b = _find(parent, edges[k, 1])
        if a != b:
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]
    for v in range(n):
        parent[v] = _find(parent, v)
    return parent


def component_labels(g: Graph) -> np.ndarray:
    """Representative vertex of each vertex's component."""
    return _component_labels(g.n, g.edges)


def connected_components(g: Graph) -> list[int]:
    """Component sizes, largest first."""
    if g.n == 0:
        return []
    counts = np.bincount(component_labels(g), minlength=g.n)
    return sorted(counts[counts > 0].tolist(), reverse=True)


def giant_component(g: Graph) -> np.ndarray:
    """Vertices of a largest component, ascending."""
    if g.n == 0:
        return np.zeros(0, dtype=np.int64)
    labels = component_labels(g)
    counts = np.bincount(labels, minlength=g.n)
    return np.flatnonzero(labels == int(np.argmax(counts)))


# ---------------------------------------------------------------- distances

@njit(cache=True)
def bfs_distances(n, offsets, nbrs, source):
    """Hop distances from ``source``; unreachable vertices get -1."""
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[source] = 0
    queue[0] = source
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for k in range(offsets[u], offsets[u + 1]):
            w = nbrs[k]
            if dist[w] < 0:
                dist[w] = du
                queue[tail] = w
                tail += 1
    return dist


def average_distance_sample(g: Graph, pairs: int = 1000, rng: np.random.Generator | None = None,
                            *, sources: int = 10) -> float:
    """Mean hop distance over random vertex pairs of the largest component.

    A full BFS runs from each of ``sources`` random giant vertices, and
    ``pairs / sources`` random targets are read off each.  When ``pairs``
    covers every unordered pair of the giant, the exact mean is returned.
    """
    if pairs < 1 or sources < 1:
        raise UsageError("pairs and sources must be positive")
    rng = np.random.default_rng() if rng is None else rng
    giant = giant_component(g)
    k = giant.size
    if k < 2:
        raise InsufficientDataError("the largest component has fewer than 2 vertices")
    if pairs >= k * (k - 1) // 2:
        total = 0
        for s in giant:
            dist = bfs_distances(g.n, g.offsets, g.neighbors, int(s))
            total += int(dist[giant].sum())
        return total / (k * (k - 1))
    srcs = rng.choice(giant, size=min(sources, k), replace=False)
    per = [pairs // srcs.size + (1 if i < pairs % srcs.size else 0) for i in range(srcs.size)]
    acc, cnt = 0.0, 0
    for s, m in zip(srcs, per):
        if m == 0:
            continue
        dist = bfs_distances(g.n, g.offsets, g.neighbors, int(s))
        others = giant[giant != s]
        t = others[rng.integers(0, others.size, size=m)]
        acc += float(dist[t].sum())
        cnt += m
    return acc / cnt


# ---------------------------------------------------------------- grid cuts

def grid_cells(positions, mu: int) -> np.ndarray:
    pos = np.asarray(positions, dtype=np.float64)
    if pos.ndim == 1:
        pos = pos.reshape(-1, 1)
    return np.minimum(np.floor(pos * mu).astype(np.int64), mu - 1)


def grid_cut_count(g: Graph, positions, mu: int) -> int:
    """Edges whose endpoints lie in different cells of the side-``1/mu`` grid."""
    pos = np.asarray(positions, dtype=np.float64)
    if pos.ndim == 1:
        pos = pos.reshape(-1, 1)
    if pos.shape[0] != g.n:
        raise UsageError("positions must have one row per vertex")
    d = pos.shape[1]
    if int(mu) != mu or mu < 1 or mu ** d > max(g.n, 1):
        raise UsageError(f"mu must be an integer in [1, n^(1/d)], got {mu!r}")
    if g.m == 0:
        return 0
    cells = grid_cells(pos, int(mu))
    differ = np.any(cells[g.edges[:, 0]] != cells[g.edges[:, 1]], axis=1)
    return int(differ.sum())


def grid_cut_bound(n: float, mu: float, alpha: float, beta: float, d: int, eta: float) -> float:
    """The cut-size expression with every hidden constant set to 1."""
    if not (n >= 1 and mu >= 1 and d >= 1 and eta > 0 and beta > 2 and alpha > 1):
        raise UsageError("invalid parameters for the grid-cut bound")
    cells = mu ** d
    per_cell = n / cells
    heavy = n * per_cell ** (2.0 - beta + eta)
    long_range = 0.0 if math.isinf(alpha) else n ** (2.0 - alpha) * mu ** (d * (alpha - 1.0))
    short_range = n ** (1.0 - 1.0 / d) * mu
    return heavy + (long_range + short_range) * (1.0 + math.log(max(per_cell, 1.0)))


# ---------------------------------------------------------------- shuffle control

@njit(cache=True)
def _hash(key, mask):
    h = np.uint64(key) * np.uint64(0x9E3779B97F4A7C15)
    return np.int64((h >> np.uint64(20)) & np.uint64(mask))


@njit(cache=True)
def _table_insert(table, mask, key):
    """Store ``key``; returns 1 if a never-used slot was consumed."""
    i = _hash(key, mask)
    while table[i] >= 0:
        i = (i + 1) & mask
    fresh = 1 if table[i] == -1 else 0
    table[i] = key
    return fresh


@njit(cache=True)
def _table_find(table, mask, key):
    i = _hash(key, mask)
    while table[i] != -1:
        if table[i] == key:
            return i
        i = (i + 1) & mask
    return -1


@njit(cache=True)
def _double_edge_swaps(n, edges, attempts, seed):
    np.random.seed(seed)
    m = edges.shape[0]
    size = 1
    while size < 4 * m + 4:
        size <<= 1
    mask = size - 1
    # -1 empty, -2 deleted
    table = np.full(size, -1, dtype=np.int64)
    used = 0
    for k in range(m):
        used += _table_insert(table, mask, edges[k, 0] * n + edges[k, 1])
    done = 0
    for _ in range(attempts):
        i = np.random.randint(0, m)
        j = np.random.randint(0, m)
        if i == j:
            continue
        a = edges[i, 0]
        b = edges[i, 1]
        c = edges[j, 0]
        dd = edges[j, 1]
        if np.random.random() < 0.5:
            c, dd = dd, c
        if a == dd or c == b or a == c or b == dd:
            continue
        k1 = min(a, dd) * n + max(a, dd)
        k2 = min(c, b) * n + max(c, b)
        if _table_find(table, mask, k1) >= 0 or _table_find(table, mask, k2) >= 0:
            continue
        table[_table_find(table, mask, edges[i, 0] * n + edges[i, 1])] = -2
        table[_table_find(table, mask, edges[j, 0] * n + edges[j, 1])] = -2
        used += _table_insert(table, mask, k1)
        used += _table_insert(table, mask, k2)
        if 4 * used > 3 * size:
            table[:] = -1
            used = 0
            for k in range(m):
                if k != i and k != j:
                    used += _table_insert(table, mask, edges[k, 0] * n + edges[k, 1])
            used += _table_insert(table, mask, k1)
            used += _table_insert(table, mask, k2)
        edges[i, 0] = min(a, dd)
        edges[i, 1] = max(a, dd)
        edges[j, 0] = min(c, b)
        edges[j, 1] = max(c, b)
        done += 1
    return done


def degree_preserving_shuffle(g: Graph, swaps_per_edge: float = 5.0, seed: int = 0) -> Graph:
    """Random double-edge swaps; keeps every degree and the graph simple."""
    if g.m < 2:
        return g
    edges = np.array(g.edges, dtype=np.int64)
    _double_edge_swaps(g.n, edges, int(swaps_per_edge * g.m), int(seed) & 0xFFFFFFFF)
    return Graph(g.n, edges, validate=False)


# ---------------------------------------------------------------- report

@dataclass
class StatsReport:
    n: int
    m: int
    global_cc: float | None = None
    degree_histogram: dict = field(default_factory=dict)
    tail_exponent: float | None = None
    tail_k_min: int | None = None
    giant_fraction: float | None = None
    component_sizes: list = field(default_factory=list)
    avg_distance_sample: float | None = None
    grid_cut: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"schema": SCHEMA_VERSION}
        out.update(asdict(self))
        out["degree_histogram"] = {str(k): v for k, v in self.degree_histogram.items()}
        out["grid_cut"] = {str(k): v for k, v in self.grid_cut.items()}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        """Flat ``key=value`` lines; absent measurements are omitted."""
        lines = [f"schema={SCHEMA_VERSION}", f"n={self.n}", f"m={self.m}"]

        def put(key, value):
            if value is not None:
                lines.append(f"{key}={value:.6g}" if isinstance(value, float) else f"{key}={value}")

        put("global_cc", self.global_cc)
        put("tail_exponent", self.tail_exponent)
        put("tail_k_min", self.tail_k_min)
        put("giant_fraction", self.giant_fraction)
        if self.component_sizes:
            put("components", len(self.component_sizes))
            put("largest_component", self.component_sizes[0])
        put("avg_distance_sample", self.avg_distance_sample)
        for mu, cut in sorted(self.grid_cut.items()):
            put(f"grid_cut.{mu}", cut)
        for k, c in sorted(self.degree_histogram.items()):
            put(f"degree_histogram.{k}", c)
        return "\n".join(lines) + "\n"


ALL_PARTS = ("cc", "tail", "components", "distance", "cut")


def compute_stats(g: Graph, positions=None, *, parts=ALL_PARTS, k_min: int = 10,
                  grid_mu=(2,), distance_pairs: int = 1000, seed: int = 0) -> StatsReport:
    """Assemble a :class:`StatsReport`; ``parts`` selects which measurements run.

    A tail estimate that lacks data is recorded as absent rather than raised.
    """
    unknown = set(parts) - set(ALL_PARTS)
    if unknown:
        raise UsageError(f"unknown stats parts: {sorted(unknown)}")
    rep = StatsReport(n=g.n, m=g.m)
    deg = g.degrees()
    vals, counts = np.unique(deg, return_counts=True)
    rep.degree_histogram = {int(k): int(c) for k, c in zip(vals, counts)}
    if "cc" in parts:
        rep.global_cc = global_clustering(g)
    if "tail" in parts:
        rep.tail_k_min = k_min
        try:
            rep.tail_exponent = tail_exponent_from_degrees(deg, k_min)
        except InsufficientDataError:
            rep.tail_exponent = None
    if "components" in parts:
        rep.component_sizes = connected_components(g)
        rep.giant_fraction = rep.component_sizes[0] / g.n if g.n else 0.0
    if "distance" in parts:
        try:
            rep.avg_distance_sample = average_distance_sample(
                g, distance_pairs, np.random.default_rng(seed))
        except InsufficientDataError:
            rep.avg_distance_sample = None
    if "cut" in parts:
        if positions is None:
            raise UsageError("grid cuts need vertex positions")
        rep.grid_cut = {int(mu): grid_cut_count(g, positions, int(mu)) for mu in grid_mu}
    return rep
