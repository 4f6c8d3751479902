import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from girg.errors import CorruptionError, UsageError
from girg.graph import Graph
from girg.model import GirgParams, make_weights_fixed
from girg.sampler import sample_girg
from girg.succinct import (
    BitVector,
    CompressedGraph,
    decode_graph,
    encode_graph,
    geometric_vertex_order,
    vertex_order_level,
)

bitstrings = st.text(alphabet="01", min_size=0, max_size=2000)


# ---------------------------------------------------------------- rank / select

def test_rank_select_examples():
    bv = BitVector.from_string("10110")
    assert bv.rank(0) == 0 and bv.rank(5) == 3
    assert bv.select(2) == 3
    ones = BitVector.from_string("1" * 300)
    assert all(ones.select(i) == i for i in range(1, 301))
    assert str(bv) == "10110"


def test_rank_select_errors():
    bv = BitVector.from_string("10110")
    for bad in (-1, 6):
        with pytest.raises(UsageError):
            bv.rank(bad)
    for bad in (0, 4):
        with pytest.raises(UsageError):
            bv.select(bad)


@given(bitstrings)
def test_rank_select_match_oracle(s):
    bv = BitVector.from_string(s)
    assert len(bv) == len(s)
    assert bv.rank(len(s)) == s.count("1")
    for b in range(0, len(s) + 1, max(1, len(s) // 50)):
        assert bv.rank(b) == oracles.rank(s, b)
    for i in range(1, s.count("1") + 1, max(1, s.count("1") // 50)):
        p = bv.select(i)
        assert p == oracles.select(s, i)
        assert bv.rank(p) == i


@pytest.mark.parametrize("density", [0.01, 0.3, 0.5, 0.97])
def test_rank_select_random_queries(density):
    rng = np.random.default_rng(int(density * 100))
    bits = (rng.random(70000) < density).astype(np.uint8)
    s = "".join(map(str, bits))
    bv = BitVector.from_bits(bits)
    csum = np.concatenate([[0], np.cumsum(bits)])
    ones = np.flatnonzero(bits) + 1
    for b in rng.integers(0, bits.size + 1, 10 ** 4):
        assert bv.rank(int(b)) == csum[b]
    for i in rng.integers(1, ones.size + 1, 10 ** 4):
        assert bv.select(int(i)) == ones[i - 1]
    for b in rng.integers(1, bits.size + 1, 200):
        r = bv.rank(int(b))
        if r:
            assert bv.select(r) <= b
    assert s[:64] == str(bv)[:64]


def test_bitvector_word_boundaries():
    for length in (63, 64, 65, 511, 512, 513, 1024):
        bv = BitVector.from_string("1" * length)
        assert bv.rank(length) == length
        assert bv.select(length) == length


# ---------------------------------------------------------------- vertex order

def test_vertex_order_examples():
    order, inverse = geometric_vertex_order(np.array([[0.5]]))
    assert order.tolist() == [0] and inverse.tolist() == [0]
    order, _ = geometric_vertex_order(np.array([0.9, 0.1, 0.6, 0.3]), 1)
    assert (order + 1).tolist() == [2, 4, 3, 1]
    order, _ = geometric_vertex_order(np.array([0.3, 0.1, 0.2, 0.9]), 1)
    # 0.1 and 0.2 share level-2 cell 0; id order is kept
    assert order.tolist() == [1, 2, 0, 3]
    assert vertex_order_level(1, 1) == 0 and vertex_order_level(1 << 10, 2) == 5


@given(st.integers(1, 200), st.integers(1, 3), st.integers(0, 10 ** 6))
def test_vertex_order_is_permutation(n, d, seed):
    pos = np.random.default_rng(seed).random((n, d))
    order, inverse = geometric_vertex_order(pos)
    assert sorted(order.tolist()) == list(range(n))
    assert np.array_equal(inverse[order], np.arange(n))


# ---------------------------------------------------------------- encoding

def _path3():
    return encode_graph(Graph(3, [(0, 1), (1, 2)]), np.array([[0.1], [0.4], [0.8]]))


def test_edgeless_encoding():
    cg = encode_graph(Graph(3, []), np.array([[0.1], [0.5], [0.9]]))
    assert str(cg.B) == "000" and str(cg.B_V) == "111" and str(cg.B_E) == "111"
    assert [cg.degree(i) for i in (1, 2, 3)] == [0, 0, 0]
    assert decode_graph(cg) == Graph(3, [])


def test_path_encoding():
    cg = _path3()
    assert cg.perm.tolist() == [0, 1, 2]
    want = oracles.encode_adjacency([[1], [0, 2], [1]])
    assert (str(cg.B), str(cg.B_V), str(cg.B_E)) == want
    assert cg.degree(2) == 2
    assert cg.neighbor(2, 1) == 1 and cg.neighbor(2, 2) == 3
    with pytest.raises(UsageError):
        cg.neighbor(2, 3)
    with pytest.raises(UsageError):
        cg.degree(4)
    assert decode_graph(cg) == Graph(3, [(0, 1), (1, 2)])


def test_encode_rejects():
    with pytest.raises(UsageError):
        encode_graph(Graph(0, []), np.zeros((0, 1)))
    with pytest.raises(UsageError):
        encode_graph(Graph(2, []), np.zeros((3, 1)))


@st.composite
def graph_with_positions(draw, max_n=40):
    n = draw(st.integers(1, max_n))
    d = draw(st.integers(1, 3))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    density = draw(st.sampled_from([0.0, 0.05, 0.3, 1.0]))
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < density
    return Graph(n, np.column_stack([iu[keep], ju[keep]])), rng.random((n, d))


def _check_all(g: Graph, pos):
    cg = encode_graph(g, pos)
    # payload equals the string oracle on the renumbered adjacency
    renum = g.relabel(cg.inverse)
    assert (str(cg.B), str(cg.B_V), str(cg.B_E)) == oracles.encode_adjacency(renum.adjacency())
    assert decode_graph(cg) == g
    assert cg.m == g.m
    adj = g.adjacency()
    for v in range(g.n):
        assert cg.degree_of(v) == len(adj[v])
        assert sorted(cg.neighbors_of(v)) == adj[v]
    # marker identity of the degree query, the last vertex uses the virtual boundary
    for i in range(1, g.n + 1):
        lhs = cg._rank_e(cg._select_v(i + 1)) - cg._rank_e(cg._select_v(i))
        assert lhs == cg.degree(i) + 1
    return cg


@settings(max_examples=100)
@given(graph_with_positions())
def test_round_trip_random_graphs(gp):
    _check_all(*gp)


@pytest.mark.parametrize("n", range(1, 9))
def test_round_trip_complete_and_star(n):
    pos = np.linspace(0, 1, n, endpoint=False).reshape(-1, 1)
    complete = Graph(n, list(itertools.combinations(range(n), 2)))
    star = Graph(n, [(0, v) for v in range(1, n)])
    _check_all(complete, pos)
    _check_all(star, pos)


def test_round_trip_girgs():
    params = GirgParams(d=2)
    ws = make_weights_fixed(1000, 2.5, 1.0)
    for seed in range(100):
        pos, g = sample_girg(params, ws, seed)
        cg = encode_graph(g, pos)
        assert decode_graph(cg) == g
        if seed < 5:
            for v in range(0, 1000, 7):
                assert cg.neighbors_of(v) == sorted(cg.neighbors_of(v), key=lambda u: cg.inverse[u])
                assert sorted(cg.neighbors_of(v)) == g.neighbors_of(v).tolist()


def test_bits_per_vertex_stable():
    params = GirgParams(d=2)
    per_vertex = []
    for k in (14, 16, 18):
        n = 2 ** k
        pos, g = sample_girg(params, make_weights_fixed(n, 2.5, 1.0), k)
        per_vertex.append(encode_graph(g, pos).total_bits / n)
    assert max(per_vertex) / min(per_vertex) < 1.3


# ---------------------------------------------------------------- file format

def test_save_load_round_trip(tmp_path):
    pos, g = sample_girg(GirgParams(d=2), make_weights_fixed(3000, 2.5, 1.0), 1)
    cg = encode_graph(g, pos)
    path = tmp_path / "g.gc"
    cg.save(path)
    back = CompressedGraph.load(path)
    assert back.B == cg.B and back.B_V == cg.B_V and back.B_E == cg.B_E
    assert np.array_equal(back.perm, cg.perm)
    assert decode_graph(back) == g
    data = path.read_bytes()
    assert data[:8] == b"GIRGCMP1"
    n, length = np.frombuffer(data[8:24], dtype="<u8")
    assert n == 3000 and length == len(cg.B)
    assert data == _to_bytes(cg)


def test_load_rejects_corruption(tmp_path):
    cg = _path3()
    path = tmp_path / "g.gc"
    cg.save(path)
    data = path.read_bytes()
    bad = [
        b"XXXXXXXX" + data[8:],
        data[:-1],
        data + b"\0",
        data[:24] + np.array([0, 0, 2], dtype="<u8").tobytes() + data[48:],
    ]
    for blob in bad:
        with pytest.raises(CorruptionError):
            CompressedGraph.from_bytes(blob)


def test_decode_detects_marker_damage():
    cg = _path3()
    # payload marker set in the middle of a gamma code
    s = list(str(cg.B_E))
    s[3] = "1" if s[3] == "0" else "0"
    damaged = CompressedGraph(cg.n, cg.B, cg.B_V, BitVector.from_string("".join(s)), cg.perm, cg.inverse)
    with pytest.raises(CorruptionError):
        decode_graph(damaged)


@settings(max_examples=200)
@given(st.integers(0, 10 ** 9))
def test_random_bit_flips_never_crash(seed):
    rng = np.random.default_rng(seed)
    n = 30
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < 0.2
    cg = encode_graph(Graph(n, np.column_stack([iu[keep], ju[keep]])), rng.random((n, 1)))
    blob = bytearray(_to_bytes(cg))
    for _ in range(rng.integers(1, 4)):
        k = int(rng.integers(8, len(blob)))
        blob[k] ^= 1 << int(rng.integers(0, 8))
    try:
        g = decode_graph(CompressedGraph.from_bytes(bytes(blob)))
    except CorruptionError:
        return
    assert np.all(g.edges[:, 0] < g.edges[:, 1])


def _to_bytes(cg):
    """The documented layout, written independently of ``CompressedGraph.save``."""
    import io
    import struct
    buf = io.BytesIO()
    buf.write(b"GIRGCMP1")
    buf.write(struct.pack("<QQ", cg.n, len(cg.B)))
    buf.write(cg.perm.astype("<u8").tobytes())
    for bv in (cg.B, cg.B_V, cg.B_E):
        buf.write(struct.pack("<Q", len(bv)))
        buf.write(bv.words.astype("<u8").tobytes())
    return buf.getvalue()
