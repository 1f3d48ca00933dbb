"""Table builders and run plumbing shared by the CLI and scripts."""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .bounds import static_opt, wilber1
from .enforce import build_multiplicative_instance, enforce_prefix
from .gf import TieBreak, gf_serve
from .opt import brute_force_opt
from .patterns import (KrMode, KrTreeSpec, PatternError, build_kr_tree, fib_gf_cost,
                       fib_promotion, kr_size, predicted_gap, predicted_gf_cost_strong,
                       predicted_promotion_scheme, predicted_promotion_strong, promote_chain,
                       promote_kr, promotion_main_term)
from .sequences import Segmented
from .stable import (StabilityTree, atomic_length, check_stability, generate,
                     random_stability_tree, strong_seven, strong_triple, weak_five)
from .tree import Tree, serve_static

DEFAULT_MAX_QUERIES = 2 ** 25


class ResourceGuardError(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    parameters: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    output_path: str = ""

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        d = json.loads(text)
        if not isinstance(d, dict):
            raise ValueError("config must be a JSON object")
        if "cmd" in d and "name" not in d:
            params = {k: v for k, v in d.items() if k not in ("seed", "out")}
            return cls(d["cmd"], params, int(d.get("seed", 0)), d.get("out", ""))
        return cls(d["name"], dict(d.get("parameters", {})), int(d.get("seed", 0)),
                   d.get("output_path", ""))


# ---------------------------------------------------------------------------
# formatting


def exact_pair(name: str, value: Fraction | None) -> dict[str, Any]:
    """``name`` as ``p/q`` and ``name_float`` as a float; blanks when absent."""
    if value is None:
        return {name: "", f"{name}_float": ""}
    value = Fraction(value)
    return {name: f"{value.numerator}/{value.denominator}", f"{name}_float": repr(float(value))}


def rows_to_csv(rows: list[dict[str, Any]]) -> str:
    if not rows:
        return ""
    cols: list[str] = []
    for row in rows:
        for c in row:
            if c not in cols:
                cols.append(c)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", restval="")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def rows_to_json(rows: list[dict[str, Any]]) -> str:
    return json.dumps(rows, indent=1, sort_keys=False) + "\n"


def render(rows: list[dict[str, Any]], fmt: str) -> str:
    if fmt == "csv":
        return rows_to_csv(rows)
    if fmt == "json":
        return rows_to_json(rows)
    raise ValueError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# tables


def ratio_limit(r: int) -> Fraction:
    a = Fraction(2, 3) ** r
    return (6 - 5 * a) / (3 - 2 * a)


def ratio_row(r: int, reps: int, max_queries: int = DEFAULT_MAX_QUERIES) -> dict[str, Any]:
    """GF against the promoted static tree on prefix + weak atomic repetitions.

    The static algorithm pays ``n`` for rebuilding the whole initial tree
    into the promoted tree at step one, then serves every query in place.
    """
    n = kr_size(2, r)
    period = 3 ** r
    gf_closed = fib_gf_cost(r)
    promoted_closed = gf_closed - fib_promotion(r)
    row: dict[str, Any] = {"r": r, "n": n, "atomic_length": period, "reps": reps}
    measured = period * reps <= max_queries
    if measured:
        inst = build_multiplicative_instance(r, reps)
        t0, t_q, t_p = inst.trees["T0"], inst.trees["T_Q"], inst.trees["T_P"]
        rep, _, _ = gf_serve(t0, inst.sequence, keep_steps=False)
        static = serve_static(t_q, inst.sequence, keep_steps=False)
        first = int(inst.sequence.segments[0][0][0]) if len(inst.sequence.segments[0][0]) else None
        step_one = t_q.depths()[first] + 1 if first is not None else 0
        promoted_total = n + static.total - step_one
        z_len = rep.segment_lengths[1]
        z_part = Segmented.of((inst.block, reps))
        wil = wilber1(z_part, t_p)
        row.update({"m": rep.m, "prefix_length": rep.segment_lengths[0],
                    "gf_total": rep.total, "promoted_static_total": promoted_total,
                    "z_restructures": rep.segment_restructures[1]})
        row.update(exact_pair("gf_avg_z", Fraction(rep.segment_totals[1], z_len)))
        row.update(exact_pair("gf_avg_closed", gf_closed))
        row.update(exact_pair("promoted_avg_z", Fraction(static.segment_totals[1], z_len)))
        row.update(exact_pair("promoted_avg_closed", promoted_closed))
        row.update(exact_pair("wilber_avg_z", wil.bound / z_len))
        row.update(exact_pair("ratio", Fraction(rep.total, promoted_total)))
    else:
        row.update({"m": "", "prefix_length": "", "gf_total": "", "promoted_static_total": "",
                    "z_restructures": ""})
        row.update(exact_pair("gf_avg_z", None))
        row.update(exact_pair("gf_avg_closed", gf_closed))
        row.update(exact_pair("promoted_avg_z", None))
        row.update(exact_pair("promoted_avg_closed", promoted_closed))
        row.update(exact_pair("wilber_avg_z", None))
        row.update(exact_pair("ratio", None))
    row.update(exact_pair("ratio_limit", ratio_limit(r)))
    return row


def cmd_ratio_table(r_values, reps: int, max_queries: int = DEFAULT_MAX_QUERIES,
                    closed_only: tuple[int, ...] = ()) -> list[dict[str, Any]]:
    rows = [ratio_row(r, reps, max_queries) for r in r_values]
    rows += [ratio_row(r, reps, 0) for r in closed_only]
    return rows


def _lglg(n: int) -> float:
    return math.log2(math.log2(n))


def gap_row(k: int, r: int, max_queries: int = DEFAULT_MAX_QUERIES, *,
            report_ratio: bool = False) -> dict[str, Any]:
    """Strong ``(k, r)`` atomic sequence: GF (from the tree itself) against the promoted static tree."""
    n = kr_size(k, r)
    m = 2 ** (k * r)
    row: dict[str, Any] = {"k": k, "r": r, "n": n, "m": m}
    if k * r <= 24 and m <= max_queries:
        st = build_kr_tree(KrTreeSpec(k, r))
        x = generate(st, m)
        rep, _, _ = gf_serve(st.tree, x, keep_steps=False)
        t_q, _ = promote_kr(st)
        stat = serve_static(t_q, x, keep_steps=False)
        row["gf_restructures"] = rep.restructures
        row.update(exact_pair("gf_avg", Fraction(rep.total, m)))
        row.update(exact_pair("promoted_avg", Fraction(stat.total, m)))
        row.update(exact_pair("gap", Fraction(rep.total - stat.total, m)))
    else:
        row["gf_restructures"] = ""
        for name in ("gf_avg", "promoted_avg", "gap"):
            row.update(exact_pair(name, None))
    row.update(exact_pair("gf_avg_closed", predicted_gf_cost_strong(k, r)))
    row.update(exact_pair("predicted_gap", predicted_gap(k, r, "Strong")))
    row.update(exact_pair("predicted_gap_main", promotion_main_term(k, r)))
    row.update(exact_pair("scheme_gap", predicted_promotion_scheme(k, r)))
    row["lglg_n"] = repr(_lglg(n))
    if report_ratio:
        row["gap_over_lglg_n"] = repr(float(predicted_gap(k, r, "Strong")) / _lglg(n))
    return row


def cmd_gap_table(k_values, r_rule: int | str = "2^k",
                  max_queries: int = DEFAULT_MAX_QUERIES) -> list[dict[str, Any]]:
    rows = []
    for k in k_values:
        if r_rule == "2^k":
            rows.append(gap_row(k, 2 ** k, max_queries, report_ratio=True))
        else:
            rows.append(gap_row(k, int(r_rule), max_queries))
    return rows


# ---------------------------------------------------------------------------
# invariant sweep


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def _fixed_structure_corpus(seed: int, count: int, max_nodes: int) -> list[StabilityTree]:
    rng = random.Random(seed)
    corpus = [strong_seven(), strong_triple(), weak_five(), build_kr_tree(KrTreeSpec(3, 2)),
              build_kr_tree(KrTreeSpec(2, 3, KrMode.WEAK_TRUNK_ROOTS))]
    corpus += [random_stability_tree(max_nodes, rng, random_phase=True) for _ in range(count)]
    return corpus


def check_fixed_structure(seed: int = 0, count: int = 50, max_nodes: int = 63, *,
                          mutate: bool = False) -> CheckResult:
    for st in _fixed_structure_corpus(seed, count, max_nodes):
        a = atomic_length(st)
        x = Segmented.of((generate(st, a), 2))
        rep, _, _ = gf_serve(st.tree, x, keep_steps=False, _invert_priorities=mutate)
        if rep.restructures:
            return CheckResult("fixed-structure", False,
                               f"{rep.restructures} restructures on {st.to_string()[:60]}")
    return CheckResult("fixed-structure", True, f"{count + 5} trees")


def _check(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    try:
        ok, detail = fn()
    except Exception as exc:  # surfaced as a failed check
        return CheckResult(name, False, f"{type(exc).__name__}: {exc}")
    return CheckResult(name, ok, detail)


def cmd_verify(level: str = "fast", *, seed: int = 0, mutate: bool = False) -> list[CheckResult]:
    full = level.lower() == "full"
    kmax, rmax = (5, 6) if full else (4, 5)
    out = []

    def small_trees():
        t = Tree.parse("2(1(-,-),3(-,-))")
        a, _, _ = gf_serve(t, [1, 3] * 50, _invert_priorities=mutate)
        b, _, _ = gf_serve(weak_five().tree, [5, 3, 1] * 50, _invert_priorities=mutate)
        ok = a.total == 200 and b.average == Fraction(8, 3)
        return ok, f"{a.total}, {b.average}"

    def gf_formula():
        bad = []
        for k in range(2, 5):
            for r in range(0, rmax + 1):
                if k * r > (20 if not full else 24):
                    continue
                st = build_kr_tree(KrTreeSpec(k, r))
                m = 2 ** (k * r)
                rep, _, _ = gf_serve(st.tree, generate(st, m), keep_steps=False,
                                     _invert_priorities=mutate)
                if Fraction(rep.total, m) != predicted_gf_cost_strong(k, r):
                    bad.append((k, r))
        return not bad, f"mismatch at {bad}" if bad else "exact"

    def promotion(formula):
        def run():
            bad = []
            for k in range(2, kmax + 1):
                for r in range(0, rmax + 1):
                    _, rep = promote_kr(build_kr_tree(KrTreeSpec(k, r)))
                    if rep.average != formula(k, r):
                        bad.append((k, r))
            return not bad, f"mismatch at {bad}" if bad else "exact"
        return run

    def fib():
        bad = []
        for r in range(1, rmax + 1):
            st = build_kr_tree(KrTreeSpec(2, r, KrMode.WEAK_TRUNK_ROOTS))
            a = atomic_length(st)
            rep, _, _ = gf_serve(st.tree, generate(st, a), keep_steps=False,
                                 _invert_priorities=mutate)
            _, pr = promote_kr(st)
            if Fraction(rep.total, a) != fib_gf_cost(r) or pr.average != fib_promotion(r):
                bad.append(r)
        return not bad, f"mismatch at {bad}" if bad else "exact"

    def enforcement():
        rng = random.Random(seed)
        bad = 0
        trials = 200 if full else 40
        for _ in range(trials):
            n = rng.randrange(1, 65)
            t0 = random_bst(n, rng)
            target = random_bst(n, rng)
            s = enforce_prefix(target).sequence.to_array()
            y = np.array([rng.randrange(1, n + 1) for _ in range(20)], dtype=np.int32)
            _, _, t = gf_serve(t0, np.concatenate([s, y]), keep_steps=False, stop_at=len(s),
                               _invert_priorities=mutate)
            bad += t != target
        return bad == 0, f"{bad}/{trials} missed"

    def sandwich():
        rng = random.Random(seed)
        bad = 0
        for _ in range(30 if full else 10):
            st = random_stability_tree(31, rng)
            a = atomic_length(st)
            x = generate(st, a * 2)
            rep, _, _ = gf_serve(st.tree, x, keep_steps=False, _invert_priorities=mutate)
            bad += wilber1(x, st.tree).bound > rep.total
        return bad == 0, f"{bad} violations"

    def tiny_opt():
        t = Tree.parse("2(1(-,-),3(-,-))")
        v = brute_force_opt(t, [1, 3] * 3).cost
        return 9 <= v <= 11, f"OPT={v}"

    def stability_check():
        rng = random.Random(seed)
        for _ in range(20):
            st = random_stability_tree(63, rng, random_phase=True)
            if not check_stability(generate(st, 3 * atomic_length(st)), st, strict_phase=True):
                return False, st.to_string()[:60]
        return True, "20 trees"

    out.append(_check("small-tree-values", small_trees))
    out.append(check_fixed_structure(seed, 50, 63, mutate=mutate))
    out.append(_check("stability-checker", stability_check))
    out.append(_check("gf-cost-formula", gf_formula))
    out.append(_check("promotion-lemma-formula", promotion(predicted_promotion_strong)))
    out.append(_check("promotion-scheme-formula", promotion(predicted_promotion_scheme)))
    out.append(_check("weak-pair", fib))
    out.append(_check("enforcement", enforcement))
    out.append(_check("wilber-below-gf", sandwich))
    out.append(_check("tiny-opt", tiny_opt))
    if full:
        out.append(_check("ratio-r6", lambda: _ratio_ok(6, 10 ** 4, Fraction(185, 100))))
        out.append(_check("ratio-r8", lambda: _ratio_ok(8, 10 ** 4, Fraction(190, 100))))
    return out


def _ratio_ok(r: int, reps: int, floor: Fraction) -> tuple[bool, str]:
    row = ratio_row(r, reps)
    value = Fraction(row["ratio"])
    return value >= floor, f"ratio {float(value):.4f}"


def random_bst(n: int, rng: random.Random) -> Tree:
    order = list(range(1, n + 1))
    rng.shuffle(order)
    children = {order[0]: [0, 0]}
    root = order[0]
    for k in order[1:]:
        v = root
        while True:
            side = 0 if k < v else 1
            if children[v][side] == 0:
                children[v][side] = k
                children[k] = [0, 0]
                break
            v = children[v][side]
    return Tree.from_links(root, {k: tuple(c) for k, c in children.items()})


# ---------------------------------------------------------------------------
# config-driven runs


def _parse_seq(v) -> list[int]:
    if isinstance(v, str):
        return [int(s) for s in v.replace(" ", "").split(",") if s]
    return [int(s) for s in v]


def _tree_from(v, n: int | None = None) -> Tree:
    if v is None:
        if n is None:
            raise ValueError("need a tree or n")
        return Tree.balanced(range(1, n + 1))
    if v == "right-spine":
        return Tree.right_spine(int(n))
    return Tree.parse(v)


def execute(cfg: ExperimentConfig, max_queries: int = DEFAULT_MAX_QUERIES) -> list[dict[str, Any]]:
    """Run one configured experiment and return its result rows."""
    p = cfg.parameters
    cmd = cfg.name
    if cmd == "gf":
        t = _tree_from(p.get("tree"), p.get("n"))
        seq = _parse_seq(p["seq"])
        if len(seq) > max_queries:
            raise ResourceGuardError("sequence exceeds --max-queries")
        rep, _, final = gf_serve(t, seq, TieBreak(p.get("policy", "smaller-depth")))
        return [{"cost": rep.total, "m": rep.m, "restructures": rep.restructures,
                 **exact_pair("average", rep.average), "final_tree": final.to_string()}]
    if cmd == "opt":
        t = _tree_from(p.get("tree"), p.get("n"))
        res = brute_force_opt(t, _parse_seq(p["seq"]), restricted=bool(p.get("restricted", False)))
        return [{"cost": res.cost, "trajectory": res.to_json()}]
    if cmd == "enforce":
        plan = enforce_prefix(Tree.parse(p["target"]))
        return [{"step": i, "layer": " ".join(map(str, layer)), "queries": " ".join(map(str, s))}
                for i, (layer, s) in enumerate(zip(plan.layers, plan.steps()))]
    if cmd == "generate":
        st = _stability_from(p, cfg.seed)
        count = int(p.get("count", atomic_length(st) * int(p.get("periods", 1))))
        if count > max_queries:
            raise ResourceGuardError("sequence exceeds --max-queries")
        return [{"tree": st.to_string(), "atomic_length": atomic_length(st),
                 "sequence": " ".join(map(str, generate(st, count).tolist()))}]
    if cmd == "wilber":
        t = Tree.parse(p["tree"])
        w = wilber1(_parse_seq(p["seq"]), t)
        return [{"node": u, "alternations": a} for u, a in sorted(w.alt_per_inner_node.items())] + \
            [{"node": "total", "alternations": sum(w.alt_per_inner_node.values()),
              **exact_pair("bound", w.bound)}]
    if cmd == "static-opt":
        n = int(p["n"])
        counts = _counts_from(p, n)
        res = static_opt(counts, n)
        return [{"n": n, "cost": res.cost, "tree": res.tree.to_string()}]
    if cmd == "ratio-table":
        return cmd_ratio_table(p.get("r_values", [1, 2, 3, 4, 5, 6]), int(p.get("reps", 1000)),
                               max_queries, tuple(p.get("closed_only", [])))
    if cmd == "gap-table":
        return cmd_gap_table(p.get("k_values", [2, 3, 4]), p.get("r_rule", "2^k"), max_queries)
    if cmd == "bounds":
        return bounds_report(cfg.seed, int(p.get("count", 10)), int(p.get("max_nodes", 31)))
    raise ValueError(f"unknown experiment {cmd!r}")


def _counts_from(p: dict, n: int):
    if "counts" in p:
        c = p["counts"]
        if isinstance(c, str):
            c = dict(item.split(":") for item in c.split(",") if item)
        return {int(k): int(v) for k, v in dict(c).items()}
    return np.bincount(np.asarray(_parse_seq(p["seq"]), dtype=np.int64), minlength=n + 1)


def _stability_from(p: dict, seed: int) -> StabilityTree:
    if "tree" in p:
        return StabilityTree.parse(p["tree"])
    if "kr" in p:
        d = p["kr"]
        return build_kr_tree(KrTreeSpec.from_json(d))
    return random_stability_tree(int(p.get("max_nodes", 31)), random.Random(seed),
                                 random_phase=bool(p.get("random_phase", False)))


def bounds_report(seed: int, count: int, max_nodes: int) -> list[dict[str, Any]]:
    """instance-id, m, n, gf_cost, wilber_bound, static_opt_cost, promoted_tree_cost."""
    rng = random.Random(seed)
    rows = []
    named = [("strong-3", strong_triple()), ("weak-5", weak_five()), ("strong-7", strong_seven())]
    named += [(f"kr-{k}-{r}", build_kr_tree(KrTreeSpec(k, r))) for k, r in ((2, 2), (3, 2))]
    named += [(f"weak-2-{r}", build_kr_tree(KrTreeSpec(2, r, KrMode.WEAK_TRUNK_ROOTS)))
              for r in (2, 3)]
    named += [(f"random-{i}", random_stability_tree(max_nodes, rng)) for i in range(count)]
    for name, st in named:
        x = generate(st, atomic_length(st))
        rep, _, _ = gf_serve(st.tree, x, keep_steps=False)
        n = st.tree.n
        so = static_opt(np.bincount(x, minlength=n + 1), n).cost
        promoted = ""
        for promote in (promote_kr, promote_chain):
            try:
                promoted = serve_static(promote(st)[0], x, keep_steps=False).total
                break
            except PatternError:
                pass
        rows.append({"instance-id": name, "m": len(x), "n": n, "gf_cost": rep.total,
                     "wilber_bound": str(wilber1(x, st.tree).bound), "static_opt_cost": so,
                     "promoted_tree_cost": promoted})
    return rows


def manifest(cfg: ExperimentConfig, artifacts: list[str]) -> dict[str, Any]:
    import numba
    return {"config": asdict(cfg), "seed": cfg.seed, "artifacts": artifacts,
            "versions": {"gflab": __version__, "python": platform.python_version(),
                         "numpy": np.__version__, "numba": numba.__version__}}


def run_config(path: str | Path, *, out: str | Path | None = None, fmt: str = "csv",
               max_queries: int = DEFAULT_MAX_QUERIES) -> Path:
    """Execute a JSON config; write the result table and ``manifest.json``."""
    cfg = ExperimentConfig.from_json(Path(path).read_text())
    outdir = Path(out or cfg.output_path or f"runs/{cfg.name}")
    outdir.mkdir(parents=True, exist_ok=True)
    rows = execute(cfg, max_queries)
    table = outdir / f"{cfg.name}.{fmt}"
    table.write_text(render(rows, fmt))
    (outdir / "manifest.json").write_text(
        json.dumps(manifest(cfg, [table.name]), indent=1, sort_keys=True) + "\n")
    return outdir


__all__ = ["ExperimentConfig", "cmd_ratio_table", "cmd_gap_table", "cmd_verify", "execute",
           "run_config", "render", "ratio_row", "gap_row", "bounds_report", "random_bst"]
