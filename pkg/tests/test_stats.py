import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

import oracles
from girg.errors import InsufficientDataError, UsageError
from girg.graph import Graph
from girg.model import GirgParams, make_weights_fixed
from girg.sampler import sample_girg
from girg.stats import (
    average_distance_sample,
    compute_stats,
    connected_components,
    degree_preserving_shuffle,
    giant_component,
    global_clustering,
    grid_cut_bound,
    grid_cut_count,
    local_clustering,
    local_clustering_all,
    tail_exponent_estimate,
    tail_exponent_from_degrees,
    triangle_counts,
)

TRIANGLE = Graph(3, [(0, 1), (1, 2), (0, 2)])
PATH3 = Graph(3, [(0, 1), (1, 2)])


@st.composite
def small_graphs(draw, max_n=10):
    n = draw(st.integers(0, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, [p for p, k in zip(pairs, keep) if k])


# ---------------------------------------------------------------- clustering

def test_clustering_examples():
    assert all(local_clustering(TRIANGLE, v) == 1.0 for v in range(3))
    assert local_clustering(PATH3, 1) == 0.0
    k4_minus = Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)])
    assert local_clustering(k4_minus, 0) == pytest.approx(2 / 3)
    assert global_clustering(Graph(5, [])) == 0.0
    assert global_clustering(TRIANGLE) == 1.0
    assert global_clustering(Graph(4, [(0, 1), (1, 2), (0, 2)])) == pytest.approx(0.75)


@given(small_graphs())
def test_clustering_matches_brute_force(g):
    adj = oracles.adjacency_sets(g.n, g.edges.tolist())
    want = [oracles.local_clustering(adj, v) for v in range(g.n)]
    assert np.allclose(local_clustering_all(g), want)
    tri = triangle_counts(g)
    assert tri.sum() % 3 == 0
    if g.n:
        assert global_clustering(g) == pytest.approx(np.mean(want))


# ---------------------------------------------------------------- tail exponent

def test_tail_calibration_on_exact_pareto():
    degrees = sps.zipf(2.5).rvs(size=10 ** 6, random_state=np.random.default_rng(1))
    assert abs(tail_exponent_from_degrees(degrees, 10) - 2.5) <= 0.05


@pytest.mark.parametrize("a", [2.2, 3.0])
def test_tail_calibration_other_exponents(a):
    degrees = sps.zipf(a).rvs(size=10 ** 6, random_state=np.random.default_rng(2))
    assert abs(tail_exponent_from_degrees(degrees, 10) - a) <= 0.05


def test_tail_insufficient_data():
    ring = Graph(100, [(v, (v + 1) % 100) for v in range(100)])
    with pytest.raises(InsufficientDataError):
        tail_exponent_estimate(ring, 10)
    with pytest.raises(InsufficientDataError):
        tail_exponent_from_degrees(np.full(1000, 12), 10)
    with pytest.raises(UsageError):
        tail_exponent_from_degrees(np.arange(100), 0)


def test_tail_on_girg():
    _, g = sample_girg(GirgParams(d=2), make_weights_fixed(10 ** 6, 2.5, 1.0), 0)
    assert 2.3 <= tail_exponent_estimate(g, 10) <= 2.7


# ---------------------------------------------------------------- components

def test_component_examples():
    assert connected_components(Graph(5, [])) == [1] * 5
    assert connected_components(Graph(5, [(i, i + 1) for i in range(4)])) == [5]
    assert connected_components(Graph(0, [])) == []


@given(small_graphs(max_n=25))
def test_components_match_oracle(g):
    adj = oracles.adjacency_sets(g.n, g.edges.tolist())
    assert connected_components(g) == oracles.component_sizes(adj)
    if g.n:
        assert giant_component(g).size == oracles.component_sizes(adj)[0]


def test_giant_on_girgs():
    ws = make_weights_fixed(10 ** 5, 2.5, 1.0)
    for seed in range(20):
        _, g = sample_girg(GirgParams(d=2), ws, seed)
        assert connected_components(g)[0] >= 0.3 * g.n


# ---------------------------------------------------------------- distances

def test_distance_examples():
    assert average_distance_sample(PATH3, 10) == pytest.approx(4 / 3)
    k6 = Graph(6, list(itertools.combinations(range(6), 2)))
    assert average_distance_sample(k6, 1000) == 1.0
    with pytest.raises(InsufficientDataError):
        average_distance_sample(Graph(3, []), 10)
    with pytest.raises(UsageError):
        average_distance_sample(PATH3, 0)


@settings(max_examples=40)
@given(small_graphs(max_n=12))
def test_exact_mean_distance_matches_oracle(g):
    if g.n == 0 or connected_components(g)[0] < 2:
        return
    adj = oracles.adjacency_sets(g.n, g.edges.tolist())
    got = average_distance_sample(g, 10 ** 6)
    # several components can tie for largest; compare against any of them
    comps = {}
    for s in range(g.n):
        comps.setdefault(frozenset(oracles.bfs(adj, s)), None)
    big = max(len(c) for c in comps)
    means = []
    for comp in comps:
        if len(comp) == big:
            tot = sum(oracles.bfs(adj, s)[t] for s in comp for t in comp if s != t)
            means.append(tot / (big * (big - 1)))
    assert any(got == pytest.approx(m) for m in means)


def test_sampled_distance_close_to_exact():
    _, g = sample_girg(GirgParams(d=1), make_weights_fixed(600, 2.5, 1.0), 3)
    exact = average_distance_sample(g, 10 ** 9)
    est = average_distance_sample(g, 20000, np.random.default_rng(0), sources=200)
    assert abs(est - exact) <= 0.05 * exact


# ---------------------------------------------------------------- grid cuts

def test_grid_cut_examples():
    g = Graph(2, [(0, 1)])
    assert grid_cut_count(g, np.array([[0.2], [0.7]]), 1) == 0
    assert grid_cut_count(g, np.array([[0.2], [0.7]]), 2) == 1
    assert grid_cut_count(g, np.array([[0.2], [0.3]]), 2) == 0
    with pytest.raises(UsageError):
        grid_cut_count(g, np.array([[0.2], [0.7]]), 3)
    with pytest.raises(UsageError):
        grid_cut_count(g, np.array([[0.2], [0.7]]), 0)


def test_grid_cut_monotone_under_refinement():
    pos, g = sample_girg(GirgParams(d=2), make_weights_fixed(2 ** 14, 2.5, 1.0), 1)
    cuts = [grid_cut_count(g, pos, mu) for mu in (1, 2, 4, 8, 16, 32, 64, 128)]
    assert cuts[0] == 0 and all(a <= b for a, b in zip(cuts, cuts[1:]))
    assert grid_cut_count(g, pos, 3) <= grid_cut_count(g, pos, 6)


def test_grid_cut_matches_brute_force():
    pos, g = sample_girg(GirgParams(d=2), make_weights_fixed(3000, 2.5, 1.0), 2)
    for mu in (2, 5, 8):
        want = sum(
            any(math.floor(Fraction(a) * mu) != math.floor(Fraction(b) * mu) for a, b in zip(pos[u], pos[v]))
            for u, v in g.edges)
        assert grid_cut_count(g, pos, mu) == want


def test_grid_cut_bound_plugin():
    n, mu, a, b, d, eta = 1e6, 2, 2.0, 2.5, 1, 0.05
    per = n / mu ** d
    want = n * per ** (2 - b + eta) + (n ** (2 - a) * mu ** (d * (a - 1)) + n ** (1 - 1 / d) * mu) * (1 + math.log(per))
    assert grid_cut_bound(n, mu, a, b, d, eta) == pytest.approx(want)
    assert 0 < grid_cut_bound(100, 1, 2.0, 2.5, 2, 0.1) < math.inf
    with pytest.raises(UsageError):
        grid_cut_bound(100, 1, 2.0, 2.5, 2, 0.0)


def test_grid_cut_sublinear_at_scale():
    ws = make_weights_fixed(10 ** 6, 2.5, 1.0)
    for seed in range(10):
        pos, g = sample_girg(GirgParams(d=2), ws, seed)
        assert grid_cut_count(g, pos, 2) / g.n <= 0.25


def test_cut_to_bound_shape_over_mu():
    pos, g = sample_girg(GirgParams(d=2), make_weights_fixed(2 ** 16, 2.5, 1.0), 4)
    ratios = [grid_cut_count(g, pos, mu) / grid_cut_bound(g.n, mu, 2.0, 2.5, 2, 0.05)
              for mu in (2, 4, 8, 16, 32, 64, 128, 256)]
    assert max(ratios) / min(ratios) <= 100


# ---------------------------------------------------------------- shuffle control

@settings(max_examples=30)
@given(small_graphs(max_n=30), st.integers(0, 1000))
def test_shuffle_preserves_degrees(g, seed):
    h = degree_preserving_shuffle(g, 10, seed)
    assert np.array_equal(h.degrees(), g.degrees())
    assert h.m == g.m
    assert np.all(h.edges[:, 0] < h.edges[:, 1])
    Graph(h.n, h.edges)  # validates simplicity


def test_shuffle_destroys_clustering():
    _, g = sample_girg(GirgParams(d=2), make_weights_fixed(10 ** 5, 2.5, 1.0), 0)
    h = degree_preserving_shuffle(g, 5, 1)
    assert global_clustering(g) >= 0.05
    assert global_clustering(h) < 0.5 * global_clustering(g)


# ---------------------------------------------------------------- report

def test_report_formats():
    pos, g = sample_girg(GirgParams(d=2), make_weights_fixed(4000, 2.5, 1.0), 0)
    rep = compute_stats(g, pos, grid_mu=(2, 4), distance_pairs=200)
    d = json.loads(rep.to_json())
    assert d["schema"] == 1 and d["n"] == 4000
    assert 0 <= d["global_cc"] <= 1 and 0 <= d["giant_fraction"] <= 1
    assert sum(d["component_sizes"]) == 4000
    assert set(d["grid_cut"]) == {"2", "4"}
    assert sum(d["degree_histogram"].values()) == 4000
    text = rep.to_text()
    assert text.startswith("schema=1\nn=4000\n") and "grid_cut.4=" in text
    with pytest.raises(UsageError):
        compute_stats(g, None, parts=("cut",))
    with pytest.raises(UsageError):
        compute_stats(g, pos, parts=("bogus",))


def test_report_absent_tail_is_omitted():
    rep = compute_stats(PATH3, parts=("tail",))
    assert rep.tail_exponent is None and "tail_exponent=" not in rep.to_text()
