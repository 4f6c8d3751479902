import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from girg.errors import UsageError
from girg.geometry import (
    CellId,
    ceil_cell_volume,
    cell_distance,
    cell_level_for_volume,
    geometric_order,
    torus_distance,
)
from girg.spatial_index import (
    PairKind,
    build_partition,
    build_point_index,
    count_in_cell,
    kth_in_cell,
)

EXAMPLE = np.array([[0.1], [0.6], [0.9], [0.3]])


def _contains(cell: CellId, x) -> bool:
    return all(oracles.cell_index_by_bisection(c, cell.level) == k for c, k in zip(x, cell.indices))


# ---------------------------------------------------------------- point index

def test_empty_index():
    idx = build_point_index(np.zeros((0, 1)), 1.0)
    assert idx.size == 0
    assert idx.cell_range(CellId(0, (0,))) == (0, -1)
    assert count_in_cell(idx, CellId(0, (0,))) == 0


def test_example_index():
    idx = build_point_index(EXAMPLE, 0.25)
    assert list(idx.ordered_points) == [0, 3, 1, 2]
    assert kth_in_cell(idx, CellId(2, (0,)), 1) == 0
    assert kth_in_cell(idx, CellId(2, (1,)), 1) == 3
    assert count_in_cell(idx, CellId(1, (0,))) == 2
    assert [kth_in_cell(idx, CellId(1, (0,)), k) for k in (1, 2)] == [0, 3]
    assert kth_in_cell(idx, CellId(2, (3,)), 1) == 2
    assert count_in_cell(idx, CellId(0, (0,))) == 4


def test_index_errors():
    idx = build_point_index(EXAMPLE, 0.25)
    with pytest.raises(UsageError):
        count_in_cell(idx, CellId(3, (0,)))
    with pytest.raises(UsageError):
        kth_in_cell(idx, CellId(2, (0,)), 2)
    with pytest.raises(UsageError):
        kth_in_cell(idx, CellId(2, (0,)), 0)
    for nu in (0.0, 1.5, -1.0):
        with pytest.raises(UsageError):
            build_point_index(EXAMPLE, nu)


def test_empty_cell_count():
    idx = build_point_index(np.array([[0.1], [0.2]]), 0.25)
    assert count_in_cell(idx, CellId(2, (3,))) == 0


@given(st.integers(1, 3), st.integers(0, 60), st.floats(0.002, 1.0), st.integers(0, 2 ** 32 - 1))
def test_index_matches_brute_force(d, n, nu, seed):
    pos = np.random.default_rng(seed).random((n, d))
    ids = np.arange(100, 100 + n)
    idx = build_point_index(pos, nu, ids=ids)
    assert sorted(idx.ordered_points.tolist()) == ids.tolist()
    assert idx.base_volume == ceil_cell_volume(nu, d)
    for level in range(idx.base_level + 1):
        if level * d > 9:
            break
        for cell in geometric_order(level, d):
            brute = {int(ids[r]) for r in range(n) if _contains(cell, pos[r])}
            got = [kth_in_cell(idx, cell, k) for k in range(1, count_in_cell(idx, cell) + 1)]
            assert len(got) == len(brute) and set(got) == brute


@pytest.mark.parametrize("d", [1, 2, 3])
def test_stored_cells_bounded(d):
    for level in range(0, 12 // d + 1):
        nu = 2.0 ** (-level * d)
        idx = build_point_index(np.zeros((0, d)), nu)
        # a flat prefix over base cells also serves every coarser level
        total_cells_all_levels = sum(2 ** (k * d) for k in range(level + 1))
        assert idx.stored_cells == 2 ** (level * d)
        assert total_cells_all_levels <= 2 ** d / (2 ** d - 1) / idx.base_volume


def test_index_construction_cost_linear():
    rng = np.random.default_rng(3)
    small = build_point_index(rng.random((1000, 2)), 2.0 ** -8).ops
    large = build_point_index(rng.random((2000, 2)), 2.0 ** -10).ops
    assert large["point_ops"] == 2 * small["point_ops"]
    assert large["cell_ops"] == 4 * small["cell_ops"]
    half = build_point_index(rng.random((1000, 2)), 2.0 ** -9).ops
    # doubling nu at most halves cell work within a factor 2
    assert half["cell_ops"] <= 2 * small["cell_ops"]


# ---------------------------------------------------------------- partition

def test_partition_root():
    pairs = build_partition(1.0, 2)
    assert len(pairs) == 1
    assert pairs[0].kind is PairKind.TYPE_I and pairs[0].a.level == 0


def test_partition_example_d1():
    pairs = build_partition(0.25, 1)
    kinds = [p.kind for p in pairs]
    assert len(pairs) == 16
    assert kinds.count(PairKind.TYPE_I) == 12
    assert kinds.count(PairKind.TYPE_II) == 4
    t2 = {(p.a.indices[0], p.b.indices[0]) for p in pairs if p.kind is PairKind.TYPE_II}
    assert t2 == {(0, 2), (2, 0), (1, 3), (3, 1)}


def test_partition_rejects_bad_nu():
    for nu in (0.0, 2.0):
        with pytest.raises(UsageError):
            build_partition(nu, 1)


@pytest.mark.parametrize("nu,d", [(0.25, 1), (2.0 ** -4, 1), (2.0 ** -8, 1), (2.0 ** -4, 2), (2.0 ** -6, 2)])
def test_partition_structure(nu, d):
    pairs = build_partition(nu, d)
    mu = ceil_cell_volume(nu, d)
    seen = set()
    for p in pairs:
        assert p.a.level == p.b.level
        assert p.volume >= nu
        if p.kind is PairKind.TYPE_I:
            assert cell_distance(p.a, p.b) == 0 and p.volume == mu
        else:
            assert cell_distance(p.a, p.b) >= p.volume ** (1 / d) - 1e-15
        seen.add((p.a, p.b))
    assert len(seen) == len(pairs)
    assert all((p.b, p.a) in seen for p in pairs)
    # pair count is O(1/nu): constant (3^d + 6^d) covers both cases
    assert len(pairs) <= (3 ** d + 6 ** d) / mu * 2


@pytest.mark.parametrize("nu,d", [(2.0 ** -4, 1), (2.0 ** -6, 1), (2.0 ** -2, 2), (2.0 ** -4, 2)])
def test_partition_exact_on_grid(nu, d):
    """Every point pair on a grid finer than the base cells lies in exactly one product."""
    pairs = build_partition(nu, d)
    level = cell_level_for_volume(nu, d)
    fine = 2 ** (level + 1)
    grid = [tuple((k + 0.5) / fine for k in idx) for idx in itertools.product(range(fine), repeat=d)]
    by_level = {}
    for p in pairs:
        by_level.setdefault(p.a.level, set()).add((p.a.indices, p.b.indices))
    for x in grid:
        for y in grid:
            hits = 0
            for lev, s in by_level.items():
                key = (tuple(oracles.cell_index_by_bisection(c, lev) for c in x),
                       tuple(oracles.cell_index_by_bisection(c, lev) for c in y))
                hits += key in s
            assert hits == 1


def test_partition_exact_random_d1():
    pairs = build_partition(1 / 16, 1)
    rng = np.random.default_rng(5)
    for x, y in rng.random((10 ** 4, 2)):
        hits = sum(_contains(p.a, [x]) and _contains(p.b, [y]) for p in pairs)
        assert hits == 1


@pytest.mark.parametrize("nu,d", [(2.0 ** -6, 1), (2.0 ** -4, 2)])
def test_type_ii_distance_sandwich(nu, d):
    rng = np.random.default_rng(9)
    for p in build_partition(nu, d):
        if p.kind is not PairKind.TYPE_II:
            continue
        dab = cell_distance(p.a, p.b)
        side = 2.0 ** -p.a.level
        for _ in range(3):
            x = (np.array(p.a.indices) + rng.random(d)) * side
            y = (np.array(p.b.indices) + rng.random(d)) * side
            r = torus_distance(x, y)
            assert dab - 1e-12 <= r <= 3 * dab + 1e-12
