"""Compressed adjacency for geometric graphs with constant-time queries.

Vertices are renumbered along the geometric cell order, so most edges join
vertices with nearby ids.  The payload ``B`` stores, for every vertex, one
dummy bit followed by one code per neighbour: a sign bit and the Elias-gamma
code of ``|i - j|``.  Two marker bitvectors of the same length flag the
start of each vertex block (``B_V``) and of every sub-block (``B_E``).

Positions inside bitvectors and the renumbered vertex ids used by
:meth:`CompressedGraph.degree` and :meth:`CompressedGraph.neighbor` are
1-based.  Stream position ``p`` lives in bit ``(p - 1) % 64`` of word
``(p - 1) // 64``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from . import _kernels
from .errors import CorruptionError, UsageError
from .graph import Graph

MAGIC = b"GIRGCMP1"
WORD = 64
SUPER = 512
WORDS_PER_SUPER = SUPER // WORD
SELECT_SAMPLE = 64
MAX_LEVEL_BITS = 62


def _popcount(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).astype(np.int64)


class BitVector:
    """Static bit sequence with rank and select.

    Rank uses absolute counts per 512-bit superblock plus counts relative to
    the superblock per 64-bit word.  Select keeps the position of every 64th
    one-bit and finishes with a search over superblocks and a word scan.
    """

    __slots__ = ("length", "words", "ones", "_super", "_block", "_samples", "_wl")

    def __init__(self, words: np.ndarray, length: int):
        length = int(length)
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if length < 0 or words.size != (length + WORD - 1) // WORD:
            raise UsageError("word count does not match the bit length")
        if length % WORD and int(words[-1]) >> (length % WORD):
            raise UsageError("bits set beyond the stated length")
        self.length = length
        self.words = words
        self.words.setflags(write=False)
        self._wl = words.tolist()
        counts = _popcount(words)
        n_super = (words.size + WORDS_PER_SUPER - 1) // WORDS_PER_SUPER
        padded = np.zeros(n_super * WORDS_PER_SUPER, dtype=np.int64)
        padded[:words.size] = counts
        per_super = padded.reshape(n_super, WORDS_PER_SUPER)
        self._super = np.zeros(n_super + 1, dtype=np.int64)
        np.cumsum(per_super.sum(axis=1), out=self._super[1:])
        block = np.cumsum(per_super, axis=1) - per_super
        self._block = block.reshape(-1)[:words.size].astype(np.uint16)
        self.ones = int(self._super[-1])
        self._samples = _kernels_select_samples(words, self.ones)

    @classmethod
    def from_bits(cls, bits) -> "BitVector":
        b = np.asarray(bits, dtype=np.uint8).reshape(-1)
        if b.size and b.max() > 1:
            raise UsageError("bits must be 0 or 1")
        n = b.size
        padded = np.zeros(((n + WORD - 1) // WORD) * WORD, dtype=np.uint8)
        padded[:n] = b
        packed = np.packbits(padded.reshape(-1, 8), axis=1, bitorder="little").reshape(-1)
        return cls(packed.view("<u8").astype(np.uint64), n)

    @classmethod
    def from_string(cls, s: str) -> "BitVector":
        return cls.from_bits([int(c) for c in s])

    def __len__(self):
        return self.length

    def to_bits(self) -> np.ndarray:
        raw = np.ascontiguousarray(self.words.astype("<u8")).view(np.uint8)
        return np.unpackbits(raw, bitorder="little")[:self.length]

    def __str__(self):
        return "".join(map(str, self.to_bits().tolist()))

    def __repr__(self):
        return f"BitVector(length={self.length}, ones={self.ones})"

    def __eq__(self, other):
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.words, other.words)

    def get(self, p: int) -> int:
        """Bit at 1-based position ``p``."""
        if not 1 <= p <= self.length:
            raise UsageError(f"position {p} outside 1..{self.length}")
        return (self._wl[(p - 1) >> 6] >> ((p - 1) & 63)) & 1

    def rank(self, b: int) -> int:
        """Number of one-bits among positions ``1..b``."""
        if not 0 <= b <= self.length:
            raise UsageError(f"rank position {b} outside 0..{self.length}")
        k, rem = divmod(b, WORD)
        if k >= len(self._wl):
            return self.ones
        return (int(self._super[k >> 3]) + int(self._block[k])
                + (self._wl[k] & ((1 << rem) - 1)).bit_count())

    def select(self, i: int) -> int:
        """1-based position of the ``i``-th one-bit."""
        if not 1 <= i <= self.ones:
            raise UsageError(f"select index {i} outside 1..{self.ones}")
        k = (i - 1) // SELECT_SAMPLE
        lo = int(self._samples[k]) >> 9
        hi = (int(self._samples[k + 1]) >> 9) if k + 1 < self._samples.size else self._super.size - 2
        sup = self._super
        # last superblock in [lo, hi] whose prefix count is below i
        while lo < hi:
            mid = (lo + hi + 1) >> 1
            if sup[mid] < i:
                lo = mid
            else:
                hi = mid - 1
        need = i - int(sup[lo])
        w = lo * WORDS_PER_SUPER
        end = min(w + WORDS_PER_SUPER, len(self._wl))
        while w + 1 < end and self._block[w + 1] < need:
            w += 1
        need -= int(self._block[w])
        x = self._wl[w]
        for _ in range(need - 1):
            x &= x - 1
        return w * WORD + (x & -x).bit_length()


@njit(cache=True)
def _kernels_select_samples(words, ones):
    """0-based bit offset of one-bits number 1, 65, 129, ..."""
    out = np.empty((ones + SELECT_SAMPLE - 1) // SELECT_SAMPLE, dtype=np.int64)
    seen = 0
    k = 0
    for w in range(words.size):
        x = words[w]
        while x != 0:
            low = x & (~x + np.uint64(1))
            if seen % SELECT_SAMPLE == 0:
                bit = 0
                t = low
                while t > np.uint64(1):
                    t >>= np.uint64(1)
                    bit += 1
                out[k] = w * WORD + bit
                k += 1
            seen += 1
            x &= x - np.uint64(1)
    return out


def vertex_order_level(n: int, d: int) -> int:
    """``floor(log2(n) / d)``, capped so that cell codes fit in 62 bits."""
    if n < 1:
        raise UsageError("n must be at least 1")
    return min((n.bit_length() - 1) // d, MAX_LEVEL_BITS // d)


def geometric_vertex_order(positions, d: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``(order, inverse)``: ``order[k]`` is the vertex placed at slot ``k``.

    Vertices are sorted by the geometric order of their level-``l0`` cell;
    ties keep the original id order.  Both arrays are 0-based.
    """
    pos = np.asarray(positions, dtype=np.float64)
    if pos.ndim == 1:
        pos = pos.reshape(-1, 1)
    n, dd = pos.shape
    if d is not None and d != dd:
        raise UsageError("d does not match the positions")
    if n < 1:
        raise UsageError("need at least one vertex")
    level = vertex_order_level(n, dd)
    codes = _kernels.morton_from_points(pos, level)
    order = np.argsort(codes, kind="stable").astype(np.int64)
    inverse = np.empty(n, dtype=np.int64)
    inverse[order] = np.arange(n, dtype=np.int64)
    return order, inverse


@njit(cache=True)
def _gamma_len(x):
    nb = 0
    while (x >> nb) > 1:
        nb += 1
    return 2 * nb + 1


@njit(cache=True)
def _set(words, p):
    words[(p - 1) >> 6] |= np.uint64(1) << np.uint64((p - 1) & 63)


@njit(cache=True)
def _encode(n, offsets, nbrs):
    """Bit streams for renumbered CSR adjacency (0-based ids inside)."""
    total = 0
    for i in range(n):
        total += 1
        for k in range(offsets[i], offsets[i + 1]):
            diff = i - nbrs[k]
            if diff < 0:
                diff = -diff
            total += 1 + _gamma_len(diff)
    nw = (total + 63) >> 6
    B = np.zeros(nw, dtype=np.uint64)
    BV = np.zeros(nw, dtype=np.uint64)
    BE = np.zeros(nw, dtype=np.uint64)
    p = 1
    for i in range(n):
        _set(BV, p)
        _set(BE, p)
        p += 1
        for k in range(offsets[i], offsets[i + 1]):
            _set(BE, p)
            diff = i - nbrs[k]
            if diff < 0:
                _set(B, p)
                diff = -diff
            p += 1
            nb = 0
            while (diff >> nb) > 1:
                nb += 1
            p += nb
            for q in range(nb, -1, -1):
                if (diff >> q) & 1:
                    _set(B, p)
                p += 1
    return B, BV, BE, total


@njit(cache=True)
def _bit(words, p):
    return (words[(p - 1) >> 6] >> np.uint64((p - 1) & 63)) & np.uint64(1)


@njit(cache=True)
def _decode(n, length, B, BV, BE):
    """Walk the markers and payload; returns (src, dst, deg, status, where)."""
    src = np.empty(16, dtype=np.int64)
    dst = np.empty(16, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    m = 0
    p = 1
    i = -1
    while p <= length:
        if _bit(BV, p) == 1:
            i += 1
            if i >= n or _bit(BE, p) == 0 or _bit(B, p) != 0:
                return src[:m], dst[:m], deg, 1, p
            p += 1
            continue
        if i < 0 or _bit(BE, p) == 0:
            return src[:m], dst[:m], deg, 1, p
        neg = _bit(B, p) == 1
        p += 1
        nb = 0
        while p <= length and _bit(B, p) == 0:
            if _bit(BE, p) == 1 or nb > 62:
                return src[:m], dst[:m], deg, 1, p
            nb += 1
            p += 1
        if p + nb > length:
            return src[:m], dst[:m], deg, 1, p
        x = 0
        for q in range(nb + 1):
            if _bit(BE, p) == 1:
                return src[:m], dst[:m], deg, 1, p
            x = (x << 1) | np.int64(_bit(B, p))
            p += 1
        j = i + x if neg else i - x
        if j < 0 or j >= n:
            return src[:m], dst[:m], deg, 1, p
        if m == src.size:
            src2 = np.empty(2 * m, dtype=np.int64)
            dst2 = np.empty(2 * m, dtype=np.int64)
            src2[:m] = src
            dst2[:m] = dst
            src = src2
            dst = dst2
        src[m] = i
        dst[m] = j
        deg[i] += 1
        m += 1
    if i != n - 1:
        return src[:m], dst[:m], deg, 1, p
    return src[:m], dst[:m], deg, 0, p


@dataclass(frozen=True, eq=False)
class CompressedGraph:
    """Encoded graph; ``perm[k]`` is the original (0-based) id of renumbered vertex ``k + 1``.

    The boundary after the last block is a virtual one-bit at position
    ``len(B) + 1`` in both marker vectors, so their stored one-counts stay
    ``n`` and ``n + sum(deg)``.
    """

    n: int
    B: BitVector
    B_V: BitVector
    B_E: BitVector
    perm: np.ndarray
    inverse: np.ndarray

    def __post_init__(self):
        if not (len(self.B) == len(self.B_V) == len(self.B_E)):
            raise CorruptionError("bitvector lengths differ")
        if self.B_V.ones != self.n or self.B_E.ones < self.n:
            raise CorruptionError("marker one-counts do not match the vertex count")
        if self.perm.shape != (self.n,):
            raise CorruptionError("permutation length does not match n")

    @property
    def payload_bits(self) -> int:
        return len(self.B)

    @property
    def total_bits(self) -> int:
        """Bits of ``B``, ``B_V`` and ``B_E`` together (indices excluded)."""
        return 3 * len(self.B)

    @property
    def m(self) -> int:
        return (self.B_E.ones - self.n) // 2

    def _select_v(self, i: int) -> int:
        return len(self.B) + 1 if i == self.n + 1 else self.B_V.select(i)

    def _rank_e(self, b: int) -> int:
        return self.B_E.ones + 1 if b == len(self.B) + 1 else self.B_E.rank(b)

    def _select_e(self, k: int) -> int:
        return len(self.B) + 1 if k == self.B_E.ones + 1 else self.B_E.select(k)

    def _check_vertex(self, i: int):
        if not 1 <= i <= self.n:
            raise UsageError(f"vertex {i} outside 1..{self.n}")

    def degree(self, i: int) -> int:
        """Degree of renumbered vertex ``i`` from two selects and two ranks."""
        self._check_vertex(i)
        b1 = self._select_v(i)
        b2 = self._select_v(i + 1)
        return self._rank_e(b2) - self._rank_e(b1) - 1

    def neighbor(self, i: int, s: int) -> int:
        """The ``s``-th neighbour (ascending) of renumbered vertex ``i``."""
        deg = self.degree(i)
        if not 1 <= s <= deg:
            raise UsageError(f"neighbour index {s} outside 1..{deg}")
        b = self._select_v(i)
        r = self._rank_e(b)
        b1 = self._select_e(r + s)
        b2 = self._select_e(r + s + 1)
        return i - self._decode_difference(b1, b2 - 1)

    def _decode_difference(self, lo: int, hi: int) -> int:
        B = self.B
        neg = B.get(lo)
        p = lo + 1
        nb = 0
        while p <= hi and B.get(p) == 0:
            nb += 1
            p += 1
        if p + nb != hi:
            raise CorruptionError(f"malformed code in payload bits {lo}..{hi}")
        x = 0
        for q in range(p, hi + 1):
            x = (x << 1) | B.get(q)
        return -x if neg else x

    def degree_of(self, v: int) -> int:
        """Degree of original (0-based) vertex ``v``."""
        return self.degree(int(self.inverse[v]) + 1)

    def neighbors_of(self, v: int) -> list[int]:
        """Original ids of the neighbours of original vertex ``v``, ascending by slot."""
        i = int(self.inverse[v]) + 1
        return [int(self.perm[self.neighbor(i, s) - 1]) for s in range(1, self.degree(i) + 1)]

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<QQ", self.n, len(self.B)))
            fh.write(self.perm.astype("<u8").tobytes())
            for bv in (self.B, self.B_V, self.B_E):
                fh.write(struct.pack("<Q", len(bv)))
                fh.write(bv.words.astype("<u8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "CompressedGraph":
        data = Path(path).read_bytes()
        return cls.from_bytes(data)

    @classmethod
    def from_bytes(cls, data: bytes) -> "CompressedGraph":
        if data[:8] != MAGIC:
            raise CorruptionError("bad magic; not a compressed graph file")
        off = 8

        def take(nbytes):
            nonlocal off
            if off + nbytes > len(data):
                raise CorruptionError("file truncated")
            chunk = data[off:off + nbytes]
            off += nbytes
            return chunk

        n, length = struct.unpack("<QQ", take(16))
        if n > len(data) // 8:
            raise CorruptionError("vertex count exceeds the file size")
        perm = np.frombuffer(take(8 * n), dtype="<u8").astype(np.int64)
        if n and not np.array_equal(np.sort(perm), np.arange(n)):
            raise CorruptionError("stored permutation is not a permutation")
        vectors = []
        for _ in range(3):
            (bl,) = struct.unpack("<Q", take(8))
            if bl != length:
                raise CorruptionError("bitvector length differs from the payload length")
            nw = (bl + WORD - 1) // WORD
            words = np.frombuffer(take(8 * nw), dtype="<u8").astype(np.uint64)
            try:
                vectors.append(BitVector(words, bl))
            except UsageError as exc:
                raise CorruptionError(str(exc)) from None
        if off != len(data):
            raise CorruptionError("trailing bytes after the last bitvector")
        inverse = np.empty(n, dtype=np.int64)
        inverse[perm] = np.arange(n, dtype=np.int64)
        return cls(int(n), vectors[0], vectors[1], vectors[2], perm, inverse)


def encode_graph(g: Graph, positions, d: int | None = None) -> CompressedGraph:
    """Renumber ``g`` geometrically and build the payload and marker vectors."""
    if not isinstance(g, Graph):
        g = Graph(*g)
    pos = np.asarray(positions, dtype=np.float64)
    if pos.ndim == 1:
        pos = pos.reshape(-1, 1)
    if pos.shape[0] != g.n:
        raise UsageError("positions must have one row per vertex")
    if g.n == 0:
        raise UsageError("cannot encode a graph without vertices")
    order, inverse = geometric_vertex_order(pos, d)
    renumbered = g.relabel(inverse)
    B, BV, BE, total = _encode(g.n, renumbered.offsets, renumbered.neighbors)
    return CompressedGraph(g.n, BitVector(B, total), BitVector(BV, total), BitVector(BE, total),
                           order, inverse)


def decode_graph(cg: CompressedGraph) -> Graph:
    """Graph on the original labels; raises :class:`CorruptionError` on malformed streams."""
    src, dst, deg, status, where = _decode(cg.n, len(cg.B), cg.B.words, cg.B_V.words, cg.B_E.words)
    if status != 0:
        raise CorruptionError(f"malformed compressed stream near bit {where}")
    if cg.n > 1 and np.any(np.diff(src * cg.n + dst) <= 0):
        raise CorruptionError("neighbour lists are not strictly ascending")
    fwd = src < dst
    a = np.sort(src[fwd] * cg.n + dst[fwd])
    b = np.sort(dst[~fwd] * cg.n + src[~fwd])
    if not np.array_equal(a, b):
        raise CorruptionError("adjacency is not symmetric")
    if np.any(src == dst):
        raise CorruptionError("self-loop in compressed stream")
    edges = np.column_stack([cg.perm[src[fwd]], cg.perm[dst[fwd]]])
    return Graph(cg.n, edges, validate=False)
