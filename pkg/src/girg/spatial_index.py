"""Point location by cell and the type-I/type-II partition of ``T^d x T^d``.

:class:`PointIndex` answers "how many points lie in cell C" and "which is
the k-th point of C" in constant time for every cell of volume at least
``nu``.  Points are bucket-sorted by the geometric order of their base-level
cell (volume ``mu = ceil_cell_volume(nu)``), so any coarser cell covers a
contiguous run of base cells and of the sorted point array; a single prefix
array over base cells yields ``s_C``/``e_C`` for cells of all levels.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import UsageError
from .geometry import (
    CellId,
    cell_distance,
    cell_level_for_volume,
    children,
    morton_encode,
    neighbour_offsets,
    parent,
)


@dataclass(frozen=True)
class PointIndex:
    d: int
    base_level: int
    ordered_points: np.ndarray
    prefix: np.ndarray
    ops: dict = field(default_factory=dict, compare=False)

    @property
    def base_volume(self) -> float:
        return 2.0 ** (-self.base_level * self.d)

    @property
    def size(self) -> int:
        return int(self.ordered_points.size)

    @property
    def stored_cells(self) -> int:
        return int(self.prefix.size - 1)

    def cell_range(self, cell: CellId) -> tuple[int, int]:
        """Zero-based ``(s_C, e_C)``; empty cells give ``e_C = s_C - 1``."""
        if cell.d != self.d:
            raise UsageError("cell dimension does not match the index")
        if cell.level > self.base_level:
            raise UsageError(
                f"cell of level {cell.level} is smaller than the index resolution (level {self.base_level})")
        shift = (self.base_level - cell.level) * self.d
        code = morton_encode(cell.indices, cell.level)
        return int(self.prefix[code << shift]), int(self.prefix[(code + 1) << shift]) - 1


def build_point_index(positions, nu: float, ids=None) -> PointIndex:
    """Index points (rows of ``positions``) for cells of volume at least ``nu``.

    ``ids`` names the points (defaults to row numbers).  Points inside one
    base cell keep their input order.
    """
    if not (0.0 < nu <= 1.0):
        raise UsageError(f"nu must lie in (0, 1], got {nu!r}")
    pos = np.asarray(positions, dtype=np.float64)
    if pos.ndim != 2:
        raise UsageError("positions must be an (n, d) array")
    n, d = pos.shape
    ids = np.arange(n, dtype=np.int64) if ids is None else np.asarray(ids, dtype=np.int64)
    if ids.shape != (n,):
        raise UsageError("ids must match the number of points")
    level = cell_level_for_volume(nu, d)
    codes = _kernels.morton_from_points(pos, level) if n else np.zeros(0, dtype=np.int64)
    order, prefix = _kernels.counting_sort(codes, 1 << (level * d))
    ops = {"point_ops": 2 * n, "cell_ops": 2 * (1 << (level * d))}
    return PointIndex(d=d, base_level=level, ordered_points=ids[order], prefix=prefix, ops=ops)


def count_in_cell(idx: PointIndex, cell: CellId) -> int:
    s, e = idx.cell_range(cell)
    return e - s + 1


def kth_in_cell(idx: PointIndex, cell: CellId, k: int) -> int:
    """Id of the k-th point (1-based) of ``cell``."""
    s, e = idx.cell_range(cell)
    if not (1 <= k <= e - s + 1):
        raise UsageError(f"k={k} outside 1..{e - s + 1}")
    return int(idx.ordered_points[s + k - 1])


class PairKind(enum.Enum):
    TYPE_I = "I"
    TYPE_II = "II"


@dataclass(frozen=True)
class PartitionPair:
    a: CellId
    b: CellId
    kind: PairKind

    @property
    def volume(self) -> float:
        return self.a.volume


def _cells_at(level: int, d: int):
    side = 1 << level
    grid = np.indices((side,) * d).reshape(d, -1).T
    return [CellId(level, tuple(int(k) for k in row)) for row in grid]


def _shift(cell: CellId, offset: tuple[int, ...]) -> CellId:
    side = 1 << cell.level
    return CellId(cell.level, tuple((k + o) % side for k, o in zip(cell.indices, offset)))


def build_partition(nu: float, d: int) -> list[PartitionPair]:
    """All ordered cell pairs of the partition for volume ``nu``.

    Type I: equal or touching cells of volume ``ceil_cell_volume(nu)``.
    Type II: separated cells of equal volume >= nu whose parents touch.
    """
    if not (0.0 < nu <= 1.0):
        raise UsageError(f"nu must lie in (0, 1], got {nu!r}")
    level = cell_level_for_volume(nu, d)
    pairs: list[PartitionPair] = []
    offsets = neighbour_offsets(level, d)
    for a in _cells_at(level, d):
        for off in offsets:
            pairs.append(PartitionPair(a, _shift(a, off), PairKind.TYPE_I))
    for lev in range(1, level + 1):
        parent_offsets = neighbour_offsets(lev - 1, d)
        for a in _cells_at(lev, d):
            pa = parent(a)
            for off in parent_offsets:
                for b in children(_shift(pa, off)):
                    if cell_distance(a, b) > 0:
                        pairs.append(PartitionPair(a, b, PairKind.TYPE_II))
    return pairs
