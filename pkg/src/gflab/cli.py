"""``gflab`` command line."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments as ex
from .enforce import GapInstance, enforce_prefix
from .tree import Tree


def _ints(text: str) -> list[int]:
    return [int(s) for s in text.replace(" ", "").split(",") if s]


def _emit(rows, args) -> None:
    text = ex.render(rows, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (directory for `run`)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--max-queries", type=int, default=ex.DEFAULT_MAX_QUERIES)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gflab", description="GreedyFuture experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ratio-table", help="GF vs promoted static tree on weak (2,r) instances")
    p.add_argument("--r", type=_ints, default=[1, 2, 3, 4, 5, 6])
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--closed-only", type=_ints, default=[], help="extra r rows, formulas only")
    _common(p)

    p = sub.add_parser("gap-table", help="additive gap on strong (k,r) instances")
    p.add_argument("--k", type=_ints, default=[2, 3, 4])
    g = p.add_mutually_exclusive_group()
    g.add_argument("--r", type=int, default=None, help="fixed r for every k")
    g.add_argument("--rule", choices=("2^k",), default="2^k")
    _common(p)

    p = sub.add_parser("verify", help="run module invariant checks")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--mutate", action="store_true", help="invert treap priorities")
    _common(p)

    p = sub.add_parser("run", help="execute a JSON experiment config")
    p.add_argument("config")
    _common(p)

    p = sub.add_parser("enforce", help="prefix forcing GF into a target tree")
    p.add_argument("--tree", required=True)
    p.add_argument("--export", default=None, help="write STEM.bin and STEM.json")
    _common(p)

    p = sub.add_parser("generate", help="stable sequence of an annotated tree")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--tree", help="annotated tree, e.g. 2!S_L(1(-,-),3(-,-))")
    src.add_argument("--kr", help="k,r[,mode]")
    p.add_argument("--max-nodes", type=int, default=31, help="random tree size when no tree is given")
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--periods", type=int, default=1)
    _common(p)

    p = sub.add_parser("opt", help="exact offline optimum (tiny instances)")
    p.add_argument("--tree", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seq", required=True)
    p.add_argument("--restricted", action="store_true")
    _common(p)

    p = sub.add_parser("wilber", help="alternation lower bound")
    p.add_argument("--tree", required=True)
    p.add_argument("--seq", required=True)
    _common(p)

    p = sub.add_parser("static-opt", help="optimal static tree for given counts")
    p.add_argument("--n", type=int, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--counts", help="key:count,...")
    g.add_argument("--seq")
    _common(p)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ex.ResourceGuardError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "ratio-table":
        worst = max(3 ** r * args.reps for r in args.r) if args.r else 0
        if worst > args.max_queries:
            raise ex.ResourceGuardError(f"3^r * reps = {worst} exceeds --max-queries")
        _emit(ex.cmd_ratio_table(args.r, args.reps, args.max_queries, tuple(args.closed_only)), args)
        return 0
    if cmd == "gap-table":
        rule = args.r if args.r is not None else "2^k"
        _emit(ex.cmd_gap_table(args.k, rule, args.max_queries), args)
        return 0
    if cmd == "verify":
        results = ex.cmd_verify(args.level, seed=args.seed, mutate=args.mutate)
        rows = [{"check": r.name, "status": "PASS" if r.ok else "FAIL", "detail": r.detail}
                for r in results]
        _emit(rows, args)
        return 0 if all(r.ok for r in results) else 1
    if cmd == "run":
        outdir = ex.run_config(args.config, out=args.out, fmt=args.format,
                               max_queries=args.max_queries)
        print(outdir)
        return 0
    if cmd == "enforce":
        if args.export:
            t = Tree.parse(args.tree)
            GapInstance(enforce_prefix(t).sequence, t.n, ("S(T)",)).export(args.export)
        params = {"target": args.tree}
        _emit(ex.execute(ex.ExperimentConfig("enforce", params, args.seed), args.max_queries), args)
        return 0
    if cmd == "generate":
        params: dict = {"max_nodes": args.max_nodes, "periods": args.periods}
        if args.tree:
            params["tree"] = args.tree
        if args.kr:
            parts = args.kr.split(",")
            params["kr"] = {"k": int(parts[0]), "r": int(parts[1]),
                            "mode": parts[2] if len(parts) > 2 else "AllStrong"}
        if args.count is not None:
            params["count"] = args.count
        _emit(ex.execute(ex.ExperimentConfig("generate", params, args.seed), args.max_queries), args)
        return 0
    if cmd in ("opt", "wilber", "static-opt"):
        params = {k: v for k, v in vars(args).items()
                  if k in ("tree", "n", "seq", "restricted", "counts") and v is not None}
        _emit(ex.execute(ex.ExperimentConfig(cmd, params, args.seed), args.max_queries), args)
        return 0
    raise AssertionError(cmd)


if __name__ == "__main__":
    sys.exit(main())
