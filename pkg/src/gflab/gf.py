"""GreedyFuture: after each access, rebuild the search path as a treap whose
priorities are next-access times of the path's key intervals.

Cost model: GF only permutes path nodes, so the minimal subtree holding all
rotated edges lies inside the path and a step costs exactly ``|path|``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import _kernels
from .sequences import as_segmented, kernel_tables
from .tree import NIL, CostReport, KeyAbsentError, Tree, rebuild_region, validate_tree


class TieBreak(str, Enum):
    SMALLER_DEPTH = "smaller-depth"
    SMALLER_VALUE = "smaller-value"


@dataclass(frozen=True)
class TraceStep:
    t: int
    query: int
    path_len: int
    restructured: bool
    fingerprint: int


@dataclass
class GfTrace:
    steps: list[TraceStep] = field(default_factory=list)

    def to_jsonl(self) -> str:
        lines = [json.dumps({"t": s.t, "query": s.query, "cost": s.path_len,
                             "restructured": s.restructured, "fingerprint": s.fingerprint})
                 for s in self.steps]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, text: str) -> "GfTrace":
        steps = []
        for line in text.splitlines():
            if line.strip():
                d = json.loads(line)
                steps.append(TraceStep(d["t"], d["query"], d["cost"], d["restructured"],
                                       d["fingerprint"]))
        return cls(steps)


def tau_priorities(path_keys: Sequence[int], future: Sequence[int]) -> list[float]:
    """First 1-based index in ``future`` hitting each key's open interval.

    The interval of ``v_i`` runs between its path neighbours in key order,
    with infinite sentinels at both ends.  ``math.inf`` if never hit.
    """
    keys = list(path_keys)
    if any(a >= b for a, b in zip(keys, keys[1:])):
        raise ValueError("path keys must be strictly increasing")
    out = []
    for i, v in enumerate(keys):
        lo = keys[i - 1] if i > 0 else -math.inf
        hi = keys[i + 1] if i + 1 < len(keys) else math.inf
        tau = math.inf
        for j, q in enumerate(future, start=1):
            if lo < q < hi:
                tau = j
                break
        out.append(tau)
    return out


def build_treap(path_keys: Sequence[int], priorities: Sequence[tuple]) -> Tree:
    """The unique BST on ``path_keys`` that is a min-heap on ``priorities``.

    Priorities must be pairwise distinct (e.g. ``(tau, depth)`` pairs).
    """
    keys = list(path_keys)
    if len(set(map(tuple, priorities))) != len(keys):
        raise ValueError("priorities must be distinct")
    children = {k: [NIL, NIL] for k in keys}
    stack: list[int] = []
    for i, k in enumerate(keys):
        last = -1
        while stack and priorities[i] < priorities[stack[-1]]:
            last = stack.pop()
        if last >= 0:
            children[k][0] = keys[last]
        if stack:
            children[keys[stack[-1]]][1] = k
        stack.append(i)
    return Tree.from_links(keys[stack[0]], {k: tuple(v) for k, v in children.items()})


def _check_tree(t0: Tree) -> None:
    if not validate_tree(t0):
        raise ValueError(f"invalid initial tree: {validate_tree(t0).reason}")


def gf_serve(t0: Tree, x, policy: TieBreak | str = TieBreak.SMALLER_DEPTH, *,
             trace: bool = False, keep_steps: bool = True, stop_at: int | None = None,
             _invert_priorities: bool = False):
    """Serve ``x`` from ``t0`` with GreedyFuture.

    Returns ``(CostReport, GfTrace | None, final_tree)``.  The compiled
    engine handles the run unless ``trace`` is set, in which case the
    pure-Python engine records a fingerprint for every step.  ``stop_at``
    halts after that many queries while still looking ahead into the rest
    of ``x``.
    """
    policy = TieBreak(policy)
    if trace:
        return gf_serve_reference(t0, x, policy, trace=True, stop_at=stop_at,
                                  _invert_priorities=_invert_priorities)
    _check_tree(t0)
    n = t0.n
    seq = as_segmented(x)
    tabs = kernel_tables(seq, n)
    left = np.asarray(t0.left, dtype=np.int64).copy()
    right = np.asarray(t0.right, dtype=np.int64).copy()
    parent = np.asarray(t0.parent, dtype=np.int64).copy()
    m = seq.length if stop_at is None else min(stop_at, seq.length)
    step_cost = np.zeros(m if keep_steps else 0, dtype=np.int64)
    step_restr = np.zeros(m if keep_steps else 0, dtype=np.bool_)
    seg_cost = np.zeros(len(seq.segments), dtype=np.int64)
    seg_restr = np.zeros(len(seq.segments), dtype=np.int64)
    root, done = _kernels.gf_kernel(
        left, right, parent, t0.root, n,
        tabs.data, tabs.offsets, tabs.lengths, tabs.reps, tabs.next_local,
        tabs.first_local, tabs.first_from,
        policy is TieBreak.SMALLER_VALUE, _invert_priorities,
        -1 if stop_at is None else stop_at,
        keep_steps, step_cost, step_restr, seg_cost, seg_restr)
    final = Tree(int(root), left.tolist(), right.tolist(), parent.tolist(), t0.keys)
    lengths = []
    remaining = done
    for b, r in seq.segments:
        take = min(len(b) * r, remaining)
        lengths.append(take)
        remaining -= take
    report = CostReport(
        total=int(seg_cost.sum()), m=int(done), restructures=int(seg_restr.sum()),
        per_step=step_cost if keep_steps else None,
        segment_totals=tuple(int(c) for c in seg_cost),
        segment_restructures=tuple(int(c) for c in seg_restr),
        segment_lengths=tuple(lengths),
        restructured_steps=step_restr if keep_steps else None)
    return report, None, final


def gf_serve_reference(t0: Tree, x, policy: TieBreak | str = TieBreak.SMALLER_DEPTH, *,
                       trace: bool = True, stop_at: int | None = None,
                       _invert_priorities: bool = False):
    """Pure-Python GreedyFuture.

    Each priority is the minimum over the interval's keys of their next
    access time, a route independent of the compiled segment tree.
    """
    policy = TieBreak(policy)
    _check_tree(t0)
    seq = [int(q) for q in as_segmented(x)]
    m = len(seq)
    nxt = [math.inf] * m
    upcoming: dict[int, float] = {}
    for i in range(m - 1, -1, -1):
        nxt[i] = upcoming.get(seq[i], math.inf)
        upcoming[seq[i]] = i
    next_access = {k: upcoming.get(k, math.inf) for k in t0.keys}
    tree = t0.copy()
    n = t0.n
    steps = []
    out_trace = GfTrace() if trace else None
    restructures = 0
    limit = m if stop_at is None else min(stop_at, m)
    for t in range(limit):
        q = seq[t]
        if q not in tree:
            raise KeyAbsentError(q)
        path = tree.path(q)
        depth_before = {v: d for d, v in enumerate(path)}
        next_access[q] = nxt[t]
        skeys = sorted(path)
        prios = []
        for i, v in enumerate(skeys):
            lo = skeys[i - 1] + 1 if i > 0 else 1
            hi = skeys[i + 1] - 1 if i + 1 < len(skeys) else n
            tau = min(next_access[y] for y in range(lo, hi + 1))
            if _invert_priorities:
                tau = -tau
            tie = v if policy is TieBreak.SMALLER_VALUE else depth_before[v]
            prios.append((tau, tie))
        shape = build_treap(skeys, prios)
        before = [(tree.left[v], tree.right[v]) for v in skeys]
        rebuild_region(tree, path, shape, in_place=True)
        changed = any((tree.left[v], tree.right[v]) != b for v, b in zip(skeys, before))
        restructures += changed
        steps.append(len(path))
        if out_trace is not None:
            out_trace.steps.append(TraceStep(t + 1, q, len(path), changed, tree.fingerprint()))
    report = CostReport(total=sum(steps), m=limit, restructures=restructures,
                        per_step=np.asarray(steps, dtype=np.int64))
    return report, out_trace, tree


def gf_is_static(t0: Tree, x) -> bool:
    report, _, _ = gf_serve(t0, x, TieBreak.SMALLER_DEPTH, keep_steps=False)
    return report.restructures == 0


def gf_tree_at(t0: Tree, x, t: int, policy: TieBreak | str = TieBreak.SMALLER_DEPTH) -> Tree:
    """GF's tree after the first ``t`` queries of ``x`` (looking ahead into all of ``x``)."""
    _, _, tree = gf_serve(t0, x, policy, keep_steps=False, stop_at=t)
    return tree
