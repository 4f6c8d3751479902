"""Torus geometry and the dyadic cell hierarchy.

Points live on the unit torus ``T^d`` with the L-infinity circle metric.  A
cell of level ``l`` is a half-open cube of side ``2**-l`` identified by its
integer corner ``(k_1, ..., k_d)``.  Cells of one level are enumerated in a
geometric (Morton / Z-order) ordering: the children of a cell are listed
consecutively, smallest corner first, coordinate 1 being the most significant
bit of each child index.  Every ancestor therefore owns a contiguous run of
the ordering, which is what the point index and the compressor rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import UsageError

#: Morton codes are stored in int64, so level * d may not exceed this.
MAX_CODE_BITS = 62


@dataclass(frozen=True)
class TorusPoint:
    coords: tuple[float, ...]

    def __post_init__(self):
        if len(self.coords) == 0:
            raise UsageError("a torus point needs at least one coordinate")
        for c in self.coords:
            if not (0.0 <= c < 1.0):
                raise UsageError(f"coordinate {c!r} outside [0, 1)")

    @property
    def d(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]


class CellId(NamedTuple):
    level: int
    indices: tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.indices)

    @property
    def volume(self) -> float:
        return math.ldexp(1.0, -self.level * self.d)

    @property
    def side(self) -> float:
        return math.ldexp(1.0, -self.level)


def _coords(x) -> tuple[float, ...]:
    return tuple(float(c) for c in x)


def torus_distance(x: Sequence[float], y: Sequence[float]) -> float:
    """L-infinity distance on the torus, in ``[0, 1/2]``."""
    x, y = _coords(x), _coords(y)
    if len(x) != len(y) or not x:
        raise UsageError(f"dimension mismatch: {len(x)} vs {len(y)}")
    best = 0.0
    for a, b in zip(x, y):
        g = abs(a - b)
        g = min(g, 1.0 - g)
        if g > best:
            best = g
    return best


def torus_distances(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise torus distance between two ``(n, d)`` arrays (broadcasts)."""
    g = np.abs(np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64))
    g = np.minimum(g, 1.0 - g)
    return g.max(axis=-1)


def cell_of_point(x: Sequence[float], level: int) -> CellId:
    if level < 0:
        raise UsageError("level must be non-negative")
    side = 1 << level
    idx = tuple(min(int(math.floor(c * side)), side - 1) for c in _coords(x))
    return CellId(level, idx)


def cell_indices(points: np.ndarray, level: int) -> np.ndarray:
    """Integer cell corners of every row of ``points`` at ``level``."""
    side = 1 << level
    k = np.floor(np.asarray(points, dtype=np.float64) * side).astype(np.int64)
    # x*2^l can round up to 2^l when x is within an ulp of 1
    np.minimum(k, side - 1, out=k)
    return k


def morton_encode(indices: Sequence[int], level: int) -> int:
    """Position of a cell in the geometric ordering of its level."""
    code = 0
    for b in range(level - 1, -1, -1):
        for k in indices:
            code = (code << 1) | ((k >> b) & 1)
    return code


def morton_decode(code: int, level: int, d: int) -> tuple[int, ...]:
    idx = [0] * d
    for b in range(level):
        for t in range(d - 1, -1, -1):
            idx[t] |= (code & 1) << b
            code >>= 1
    return tuple(idx)


def morton_codes(cells: np.ndarray, level: int) -> np.ndarray:
    """Vectorised :func:`morton_encode` over an ``(n, d)`` array of corners."""
    cells = np.asarray(cells, dtype=np.int64)
    n, d = cells.shape
    if level * d > MAX_CODE_BITS:
        raise UsageError(f"level {level} too deep for d={d}")
    code = np.zeros(n, dtype=np.int64)
    for b in range(level - 1, -1, -1):
        for t in range(d):
            code = (code << 1) | ((cells[:, t] >> b) & 1)
    return code


def cell_level_for_volume(x: float, d: int) -> int:
    """Largest level whose cell volume is still at least ``x``."""
    if not (0.0 < x <= 1.0):
        raise UsageError(f"volume {x!r} outside (0, 1]")
    if d < 1:
        raise UsageError("dimension must be at least 1")
    level = int(math.floor(-math.log2(x) / d))
    while math.ldexp(1.0, -level * d) < x:
        level -= 1
    while math.ldexp(1.0, -(level + 1) * d) >= x:
        level += 1
    return level


def ceil_cell_volume(x: float, d: int) -> float:
    """Round ``x`` up to the nearest realisable cell volume ``2**(-l*d)``."""
    return math.ldexp(1.0, -cell_level_for_volume(x, d) * d)


def successor(cell: CellId) -> CellId | None:
    """Next cell of the same level in the geometric ordering, or None."""
    d = cell.d
    code = morton_encode(cell.indices, cell.level) + 1
    if code >= 1 << (cell.level * d):
        return None
    return CellId(cell.level, morton_decode(code, cell.level, d))


def geometric_order(level: int, d: int) -> Iterator[CellId]:
    """All ``2**(level*d)`` cells of a level, by following successor links."""
    if level < 0:
        raise UsageError("level must be non-negative")
    cell: CellId | None = CellId(level, (0,) * d)
    while cell is not None:
        yield cell
        cell = successor(cell)


def parent(cell: CellId) -> CellId:
    if cell.level < 1:
        raise UsageError("the root cell has no parent")
    return CellId(cell.level - 1, tuple(k >> 1 for k in cell.indices))


def children(cell: CellId) -> list[CellId]:
    """The ``2**d`` children in geometric order."""
    d = cell.d
    out = []
    for bits in range(1 << d):
        idx = tuple((k << 1) | ((bits >> (d - 1 - t)) & 1) for t, k in enumerate(cell.indices))
        out.append(CellId(cell.level + 1, idx))
    return out


def _axis_gap(a: int, b: int, side: int) -> int:
    """Number of whole cells strictly between two indices on a circle."""
    delta = abs(a - b) % side
    return max(0, min(delta, side - delta) - 1)


def cell_distance(a: CellId, b: CellId) -> float:
    if a.level != b.level:
        raise UsageError("cell_distance needs cells of equal level")
    if a.d != b.d:
        raise UsageError("dimension mismatch")
    side = 1 << a.level
    gap = max(_axis_gap(x, y, side) for x, y in zip(a.indices, b.indices))
    return math.ldexp(float(gap), -a.level)


def cells_touch(a: CellId, b: CellId) -> bool:
    """True when the cells are equal or share boundary (distance 0)."""
    return cell_distance(a, b) == 0.0


def cell_contains(cell: CellId, x: Sequence[float]) -> bool:
    return cell_of_point(x, cell.level).indices == cell.indices


def neighbour_offsets(level: int, d: int) -> list[tuple[int, ...]]:
    """Distinct index offsets (mod ``2**level``) reaching all touching cells."""
    side = 1 << level
    axis = sorted({delta % side for delta in (-1, 0, 1)})
    out: list[tuple[int, ...]] = [()]
    for _ in range(d):
        out = [o + (a,) for o in out for a in axis]
    return out
