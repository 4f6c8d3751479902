"""``girg`` command line: generate, compress, query, decode, stats, bench.

Exit codes: 0 success, 2 usage, 3 corrupt input, 4 model configuration,
5 insufficient data.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as gio
from .errors import GirgError, UsageError
from .graph import Graph
from .model import INFINITY, GirgParams, make_weights_fixed, sample_weights
from .sampler import STREAM_WEIGHTS, expected_runtime_probe, sample_girg, substream

GIRG_OPTIONS = ("d", "alpha", "beta", "delta", "w_min", "weights", "p_scale", "c_upper", "tau")
HYPERBOLIC_OPTIONS = ("alpha_h", "c_h", "t_h")


def parse_real(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return INFINITY
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_size(text: str) -> int:
    """Integers written plainly, as ``2^k`` or in scientific notation."""
    text = text.strip()
    m = re.fullmatch(r"(\d+)\^(\d+)", text)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a size: {text!r}") from None
    if v != int(v) or v < 0:
        raise argparse.ArgumentTypeError(f"not a non-negative integer: {text!r}")
    return int(v)


def parse_sweep(text: str) -> list[int]:
    """``2^17..2^20`` (doubling), ``a,b,c`` or a single size."""
    if ".." in text:
        lo, hi = (parse_size(t) for t in text.split("..", 1))
        if lo < 1 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad sweep range {text!r}")
        out = [lo]
        while out[-1] * 2 <= hi:
            out.append(out[-1] * 2)
        return out
    return [parse_size(t) for t in text.split(",") if t.strip()]


def parse_mu_list(text: str) -> list[int]:
    out = [parse_size(t) for t in text.split(",") if t.strip()]
    for mu in out:
        if mu < 1 or mu & (mu - 1):
            raise argparse.ArgumentTypeError(f"grid mu must be a power of 2, got {mu}")
    return out


@dataclass
class RunConfig:
    """Validated options of one invocation."""

    command: str
    seed: int = 0
    n: int | None = None
    hyperbolic: bool = False
    params: GirgParams | None = None
    weight_mode: str = "fixed"
    delta: float = 1.0
    w_min: float = 1.0
    alpha_H: float | None = None
    C_H: float | None = None
    T_H: float | None = None
    threads: int = 1
    paths: dict = field(default_factory=dict)


def _girg_params(args) -> GirgParams:
    return GirgParams(
        d=args.d if args.d is not None else 1,
        alpha=args.alpha if args.alpha is not None else 2.0,
        beta=args.beta if args.beta is not None else 2.5,
        p_scale=args.p_scale if args.p_scale is not None else 1.0,
        c_upper=args.c_upper,
        tau_threshold=args.tau if args.tau is not None else 1.0,
    )


def build_config(args) -> RunConfig:
    cfg = RunConfig(command=args.command, seed=args.seed, threads=getattr(args, "threads", 1))
    if cfg.threads < 1:
        raise UsageError("--threads must be at least 1")
    if args.command in ("generate", "bench"):
        hyper = getattr(args, "hyperbolic", False)
        given_girg = [o for o in GIRG_OPTIONS if getattr(args, o, None) is not None]
        given_h = [o for o in HYPERBOLIC_OPTIONS if getattr(args, o, None) is not None]
        if hyper and given_girg:
            raise UsageError("--hyperbolic excludes GIRG options: "
                             + ", ".join("--" + o.replace("_", "-") for o in given_girg))
        if not hyper and given_h:
            raise UsageError("hyperbolic options need --hyperbolic")
        cfg.hyperbolic = hyper
        if hyper:
            if args.alpha_h is None or args.t_h is None:
                raise UsageError("--hyperbolic needs --alpha-h and --t-h")
            cfg.alpha_H, cfg.T_H = args.alpha_h, args.t_h
            cfg.C_H = args.c_h if args.c_h is not None else 0.0
        else:
            cfg.params = _girg_params(args)
            if args.delta is not None and args.w_min is not None:
                raise UsageError("give --delta (fixed weights) or --w-min (sampled weights), not both")
            cfg.weight_mode = args.weights or ("sampled" if args.w_min is not None else "fixed")
            if cfg.weight_mode == "fixed" and args.w_min is not None:
                raise UsageError("--w-min applies to sampled weights; use --delta")
            if cfg.weight_mode == "sampled" and args.delta is not None:
                raise UsageError("--delta applies to fixed weights; use --w-min")
            cfg.delta = args.delta if args.delta is not None else 1.0
            cfg.w_min = args.w_min if args.w_min is not None else 1.0
            if not (cfg.delta > 0 and cfg.w_min > 0):
                raise UsageError("--delta and --w-min must be positive")
    if getattr(args, "n", None) is not None:
        if args.n < 1:
            raise UsageError("--n must be at least 1")
        cfg.n = args.n
    return cfg


def _weights(cfg: RunConfig, n: int):
    if cfg.weight_mode == "fixed":
        return make_weights_fixed(n, cfg.params.beta, cfg.delta)
    return sample_weights(n, cfg.params.beta, cfg.w_min, substream(cfg.seed, STREAM_WEIGHTS))


def _say(text: str, out=None):
    (out or sys.stdout).write(text + "\n")


# ---------------------------------------------------------------- commands

def cmd_generate(args) -> int:
    cfg = build_config(args)
    if cfg.n is None:
        raise UsageError("--n is required")
    t0 = time.perf_counter()
    if cfg.hyperbolic:
        from .hyperbolic import HyperbolicParams, sample_hrg_fast

        hp = HyperbolicParams(cfg.alpha_H, cfg.C_H, cfg.T_H, cfg.n)
        pts, g = sample_hrg_fast(hp, cfg.seed, threads=cfg.threads)
        positions = (pts.phi / (2.0 * math.pi)).reshape(-1, 1)
        positions[positions >= 1.0] = 0.0
        header = gio.edge_list_header(cfg.n, 1, hp.alpha, hp.beta, cfg.seed, model="hyperbolic",
                                      alpha_H=float(hp.alpha_H), C_H=float(hp.C_H),
                                      T_H=float(hp.T_H), R=float(hp.R))
        if args.polar:
            gio.write_polar(args.polar, pts.r, pts.phi)
    else:
        ws = _weights(cfg, cfg.n)
        positions, g = sample_girg(cfg.params, ws, cfg.seed, threads=cfg.threads)
        p = cfg.params
        header = gio.edge_list_header(cfg.n, p.d, p.alpha, p.beta, cfg.seed)
        if args.weights_out:
            ws.save(args.weights_out)
    elapsed = time.perf_counter() - t0
    gio.write_edge_list(args.out, g, header)
    if args.positions:
        gio.write_positions(args.positions, positions)
    if args.compressed:
        from .succinct import encode_graph

        encode_graph(g, positions).save(args.compressed)
    _say(f"n={g.n} m={g.m} seconds={elapsed:.3f}")
    return 0


def _load_graph(args) -> tuple[Graph, np.ndarray | None]:
    if getattr(args, "compressed", None):
        from .succinct import CompressedGraph, decode_graph

        g = decode_graph(CompressedGraph.load(args.compressed))
    elif getattr(args, "edges", None):
        g, _ = gio.read_edge_list(args.edges)
    else:
        raise UsageError("give --edges or --compressed")
    pos = gio.read_positions(args.positions, g.n) if getattr(args, "positions", None) else None
    return g, pos


def cmd_compress(args) -> int:
    from .succinct import encode_graph

    g, _ = gio.read_edge_list(args.edges)
    pos = gio.read_positions(args.positions, g.n)
    cg = encode_graph(g, pos)
    cg.save(args.out)
    _say(f"n={cg.n} m={cg.m} payload_bits={cg.payload_bits} "
         f"bits_per_vertex={cg.total_bits / max(cg.n, 1):.3f}")
    return 0


def cmd_decode(args) -> int:
    from .succinct import CompressedGraph, decode_graph

    g = decode_graph(CompressedGraph.load(args.compressed))
    gio.write_edge_list(args.out, g, {"n": g.n})
    _say(f"n={g.n} m={g.m}")
    return 0


def _query_lines(args):
    if args.query:
        yield " ".join(args.query)
    if args.queries:
        src = sys.stdin if args.queries == "-" else open(args.queries)
        with src:
            for line in src:
                if line.strip() and not line.lstrip().startswith("#"):
                    yield line


def cmd_query(args) -> int:
    """Answer ``degree <i>`` / ``neighbor <i> <s>`` from the compressed file.

    Vertex ids are the 1-based ids of the edge list unless ``--renumbered``
    selects the internal geometric numbering.
    """
    from .succinct import CompressedGraph

    cg = CompressedGraph.load(args.compressed)

    def to_slot(v):
        if args.renumbered:
            return v
        if not 1 <= v <= cg.n:
            raise UsageError(f"vertex {v} outside 1..{cg.n}")
        return int(cg.inverse[v - 1]) + 1

    def from_slot(i):
        return i if args.renumbered else int(cg.perm[i - 1]) + 1

    count = 0
    for line in _query_lines(args):
        tok = line.split()
        try:
            if tok[0] == "degree" and len(tok) == 2:
                _say(f"degree {tok[1]} {cg.degree(to_slot(int(tok[1])))}")
            elif tok[0] == "neighbor" and len(tok) == 3:
                j = cg.neighbor(to_slot(int(tok[1])), int(tok[2]))
                _say(f"neighbor {tok[1]} {tok[2]} {from_slot(j)}")
            else:
                raise UsageError(f"unknown query {line.strip()!r}")
        except ValueError as exc:
            if isinstance(exc, GirgError):
                raise
            raise UsageError(f"bad query {line.strip()!r}") from None
        count += 1
    if count == 0:
        raise UsageError("no queries given")
    return 0


def cmd_stats(args) -> int:
    from .plots import plot_degree_distribution
    from .stats import ALL_PARTS, compute_stats

    parts = tuple(p.strip() for p in args.parts.split(",")) if args.parts else ALL_PARTS
    g, pos = _load_graph(args)
    if "cut" in parts and pos is None:
        if args.parts:
            raise UsageError("the 'cut' part needs --positions")
        parts = tuple(p for p in parts if p != "cut")
    d = pos.shape[1] if pos is not None else 1
    for mu in args.grid_mu:
        if mu ** d > g.n:
            raise UsageError(f"grid mu={mu} exceeds n^(1/d)")
    rep = compute_stats(g, pos, parts=parts, k_min=args.k_min, grid_mu=args.grid_mu,
                        distance_pairs=args.pairs, seed=args.seed)
    text = rep.to_json() + "\n" if args.format == "json" else rep.to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.plot_dir:
        Path(args.plot_dir).mkdir(parents=True, exist_ok=True)
        beta = rep.tail_exponent
        plot_degree_distribution(g.degrees(), Path(args.plot_dir) / "degree_ccdf.png",
                                 beta=beta, k_min=args.k_min)
    return 0


def cmd_bench(args) -> int:
    from .plots import plot_bench

    cfg = build_config(args)
    if cfg.hyperbolic:
        raise UsageError("bench runs the GIRG sampler only")
    rows, ratios = expected_runtime_probe(args.sweep, cfg.params, cfg.seed, weights=cfg.weight_mode,
                                          w_min=cfg.delta if cfg.weight_mode == "fixed" else cfg.w_min,
                                          repeats=args.repeats, threads=cfg.threads)
    records = [{"n": r.n, "seconds": r.seconds, "edges": r.edges,
                "ratio": (ratios[k - 1] if k else None)} for k, r in enumerate(rows)]
    if args.format == "json":
        text = json.dumps({"schema": 1, "rows": records}, indent=2) + "\n"
    else:
        sep = "," if args.format == "csv" else "\t"
        lines = [sep.join(["n", "seconds", "edges", "edges_per_vertex", "ratio"])]
        for r, rec in zip(rows, records):
            ratio = "" if rec["ratio"] is None else f"{rec['ratio']:.3f}"
            lines.append(sep.join([str(r.n), f"{r.seconds:.4f}", str(r.edges),
                                   f"{r.edges_per_vertex:.3f}", ratio]))
        text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.plot_dir:
        Path(args.plot_dir).mkdir(parents=True, exist_ok=True)
        plot_bench([r.n for r in rows], [r.seconds for r in rows],
                   Path(args.plot_dir) / "bench_scaling.png")
    return 0


# ---------------------------------------------------------------- parser

def _model_options(p: argparse.ArgumentParser):
    g = p.add_argument_group("GIRG model")
    g.add_argument("--d", type=int, help="dimension (default 1)")
    g.add_argument("--alpha", type=parse_real, help="decay exponent > 1 or 'inf' (default 2)")
    g.add_argument("--beta", type=parse_real, help="power-law exponent > 2 (default 2.5)")
    g.add_argument("--weights", choices=("fixed", "sampled"), help="weight family")
    g.add_argument("--delta", type=float, help="scale of fixed weights (default 1)")
    g.add_argument("--w-min", type=float, help="minimum of sampled Pareto weights")
    g.add_argument("--p-scale", type=float, help="edge probability constant (default 1)")
    g.add_argument("--c-upper", type=float, help="sampler bound constant (default p-scale)")
    g.add_argument("--tau", type=float, help="threshold radius multiplier for alpha=inf")
    h = p.add_argument_group("hyperbolic model")
    h.add_argument("--hyperbolic", action="store_true", help="sample a hyperbolic random graph")
    h.add_argument("--alpha-h", type=float, help="radial density exponent > 1/2")
    h.add_argument("--c-h", type=float, help="disk radius offset (R = 2 ln n + C_H)")
    h.add_argument("--t-h", type=float, help="temperature; 0 selects the threshold model")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="girg", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="JSON file of option defaults (flags override)")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")

    p = sub.add_parser("generate", help="sample a graph and write it to files")
    common(p)
    p.add_argument("--n", type=parse_size, required=True)
    _model_options(p)
    p.add_argument("--out", required=True, help="edge list path")
    p.add_argument("--positions", help="write torus positions here")
    p.add_argument("--polar", help="write hyperbolic 'r phi' lines here")
    p.add_argument("--weights-out", help="write the weight sequence here")
    p.add_argument("--compressed", help="also write the compressed binary here")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("compress", help="encode an edge list with its positions")
    common(p)
    p.add_argument("--edges", required=True)
    p.add_argument("--positions", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decode", help="write the edge list stored in a compressed file")
    common(p)
    p.add_argument("--compressed", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("query", help="degree / neighbour queries on a compressed file")
    common(p)
    p.add_argument("--compressed", required=True)
    p.add_argument("--queries", help="file of query lines, '-' for stdin")
    p.add_argument("--renumbered", action="store_true", help="ids refer to the geometric numbering")
    p.add_argument("query", nargs="*", help="e.g. 'degree 5' or 'neighbor 5 2'")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("stats", help="structural statistics report")
    common(p)
    p.add_argument("--edges")
    p.add_argument("--compressed")
    p.add_argument("--positions")
    p.add_argument("--parts", help="comma list of cc,tail,components,distance,cut")
    p.add_argument("--k-min", type=int, default=10)
    p.add_argument("--grid-mu", type=parse_mu_list, default=[2], help="comma list of powers of 2")
    p.add_argument("--pairs", type=int, default=1000, help="sampled pairs for distances")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.add_argument("--plot-dir", help="write degree_ccdf.png here")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("bench", help="sampler wall time over a doubling sweep")
    common(p)
    p.add_argument("--sweep", type=parse_sweep, required=True, help="e.g. 2^17..2^20 or 1000,2000")
    _model_options(p)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--out")
    p.add_argument("--plot-dir", help="write bench_scaling.png here")
    p.set_defaults(func=cmd_bench)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = ap.parse_args(argv)
    if not args.config:
        return args
    try:
        conf = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(conf, dict):
        raise UsageError("config file must hold a JSON object")
    argv = list(sys.argv[1:] if argv is None else argv)
    sub_idx = argv.index(args.command)
    extra = []
    for key, value in conf.items():
        flag = "--" + key.replace("_", "-")
        if flag in argv:
            continue
        if value is True:
            extra.append(flag)
        elif value is not False and value is not None:
            extra += [flag, str(value)]
    return ap.parse_args(argv[:sub_idx + 1] + extra + argv[sub_idx + 1:])


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = _apply_config(ap, argv)
        if getattr(args, "sweep", None) is not None and not args.sweep:
            raise UsageError("empty sweep")
        return args.func(args)
    except GirgError as exc:
        sys.stderr.write(f"girg: error: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"girg: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
