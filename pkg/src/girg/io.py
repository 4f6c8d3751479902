"""Text formats: edge lists with a parameter header, positions, polar points, weights.

Edge lists are 1-based on disk and 0-based in memory.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import CorruptionError, UsageError
from .graph import Graph

HEADER_PREFIX = "# girg"


def format_real(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.17g}"


def edge_list_header(n: int, d: int, alpha: float, beta: float, seed: int, **extra) -> dict:
    head = {"n": n, "d": d, "alpha": format_real(alpha), "beta": format_real(beta), "seed": seed}
    head.update({k: (format_real(v) if isinstance(v, float) else v) for k, v in extra.items()})
    return head


def write_edge_list(path: str | Path, g: Graph, header: dict | None = None) -> None:
    """Header line, then ``u v`` per edge with ``u < v``, 1-based, ascending."""
    header = dict(header or {})
    header.setdefault("n", g.n)
    if int(header["n"]) != g.n:
        raise UsageError("header n does not match the graph")
    line = HEADER_PREFIX + "".join(f" {k}={v}" for k, v in header.items())
    with open(path, "w") as fh:
        fh.write(line + "\n")
        if g.m:
            np.savetxt(fh, g.edges + 1, fmt="%d")


def parse_header(line: str) -> dict:
    if not line.startswith(HEADER_PREFIX):
        raise CorruptionError("edge list does not start with a '# girg' header")
    out = {}
    for tok in line[len(HEADER_PREFIX):].split():
        if "=" not in tok:
            raise CorruptionError(f"malformed header token {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    if "n" not in out:
        raise CorruptionError("header lacks n=")
    return out


def read_edge_list(path: str | Path) -> tuple[Graph, dict]:
    with open(path) as fh:
        first = fh.readline()
        header = parse_header(first.strip())
        rest = fh.read()
    try:
        n = int(header["n"])
        flat = np.array(rest.split(), dtype=np.int64)
    except ValueError as exc:
        raise CorruptionError(f"malformed edge list: {exc}") from None
    if flat.size % 2:
        raise CorruptionError("edge list has an odd number of endpoints")
    edges = flat.reshape(-1, 2) - 1
    try:
        g = Graph(n, edges)
    except UsageError as exc:
        raise CorruptionError(f"invalid edge list: {exc}") from None
    return g, header


def write_positions(path: str | Path, positions) -> None:
    pos = np.asarray(positions, dtype=np.float64)
    np.savetxt(path, pos.reshape(pos.shape[0], -1), fmt="%.17g")


def read_positions(path: str | Path, n: int | None = None) -> np.ndarray:
    try:
        pos = np.loadtxt(path, dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise CorruptionError(f"malformed positions file: {exc}") from None
    if n is not None and pos.shape[0] != n:
        raise CorruptionError(f"positions file has {pos.shape[0]} rows, expected {n}")
    if pos.size and (pos.min() < 0.0 or pos.max() >= 1.0):
        raise CorruptionError("positions must lie in [0, 1)")
    return pos


def write_polar(path: str | Path, r, phi) -> None:
    np.savetxt(path, np.column_stack([r, phi]), fmt="%.17g")


def read_polar(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    a = np.loadtxt(path, dtype=np.float64, ndmin=2)
    if a.shape[1] != 2:
        raise CorruptionError("polar file must have two columns 'r phi'")
    return a[:, 0], a[:, 1]
