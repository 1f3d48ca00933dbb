"""Exact offline optimum on tiny instances by dynamic programming over shapes.

Step semantics: the query's search path ``P`` is always paid; optionally
one connected region ``U`` of the current tree is replaced by any BST on
its keys, with the hanging subtrees reattached in order.  The step costs
``|P ∪ U|``.  The restricted variant only allows ``U`` that contain the
root (and hence the whole search path).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .tree import NIL, Tree, rebuild_region

MAX_SHAPES_N = 8
MAX_OPT_N = 6
MAX_OPT_M = 14


class InstanceTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class Transition:
    source: int
    query: int
    target: int
    cost: int


@lru_cache(maxsize=None)
def _bst_links_cached(lo: int, hi: int) -> tuple:
    if lo > hi:
        return ((NIL, {}),)
    out = []
    for root in range(lo, hi + 1):
        for (lr, lc), (rr, rc) in product(_bst_links_cached(lo, root - 1),
                                          _bst_links_cached(root + 1, hi)):
            children = {**lc, **rc, root: (lr, rr)}
            out.append((root, children))
    return tuple(out)


def all_bsts(keys) -> list[Tree]:
    """Every BST on the given keys (any increasing key list)."""
    keys = sorted(keys)
    out = []
    for root, children in _bst_links_cached(1, len(keys)):
        relabel = {i + 1: k for i, k in enumerate(keys)}
        relabel[NIL] = NIL
        ch = {relabel[v]: (relabel[a], relabel[b]) for v, (a, b) in children.items()}
        out.append(Tree.from_links(relabel[root], ch))
    return out


def enumerate_shapes(n: int) -> list[Tree]:
    if not 1 <= n <= MAX_SHAPES_N:
        raise InstanceTooLargeError(f"shape enumeration supports 1 <= n <= {MAX_SHAPES_N}")
    return _space(n).shapes


def _connected_regions(t: Tree) -> list[frozenset[int]]:
    """Every non-empty connected node set, grouped by its top node."""
    per_top: dict[int, list[frozenset[int]]] = {}
    for v in reversed(t.preorder()):
        options = [frozenset([v])]
        for c in t.children(v):
            if c != NIL:
                options = options + [o | s for o in options for s in per_top[c]]
        per_top[v] = options
    return [r for regions in per_top.values() for r in regions]


def _mask(keys) -> int:
    m = 0
    for k in keys:
        m |= 1 << k
    return m


class ShapeSpace:
    """All shapes on ``1..n`` with their region-rebuild moves."""

    def __init__(self, n: int):
        self.n = n
        self.shapes = all_bsts(range(1, n + 1))
        self.index = {s.to_string(): i for i, s in enumerate(self.shapes)}
        self._moves: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def shape_id(self, t: Tree) -> int:
        return self.index[t.to_string()]

    def moves(self, sid: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(region_mask, contains_root, target)`` for every non-empty region rebuild."""
        if sid not in self._moves:
            t = self.shapes[sid]
            masks, roots, targets = [], [], []
            for region in _connected_regions(t):
                m = _mask(region)
                for shape in all_bsts(region):
                    masks.append(m)
                    roots.append(t.root in region)
                    targets.append(self.shape_id(rebuild_region(t, region, shape)))
            self._moves[sid] = (np.array(masks, dtype=np.int64), np.array(roots, dtype=bool),
                                np.array(targets, dtype=np.int64))
        return self._moves[sid]

    def transitions(self, sid: int, query: int, *, restricted: bool = False) -> list[Transition]:
        t = self.shapes[sid]
        pmask = _mask(t.path(query))
        plen = bin(pmask).count("1")
        best = {sid: plen}
        masks, roots, targets = self.moves(sid)
        for m, has_root, to in zip(masks.tolist(), roots.tolist(), targets.tolist()):
            if restricted and not has_root:
                continue
            c = bin(pmask | m).count("1")
            if c < best.get(to, 1 << 30):
                best[to] = c
        return [Transition(sid, query, to, c) for to, c in sorted(best.items())]


@lru_cache(maxsize=None)
def _space(n: int) -> ShapeSpace:
    return ShapeSpace(n)


def transitions(source: Tree, query: int, *, restricted: bool = False) -> list[Transition]:
    space = _space(source.n)
    return space.transitions(space.shape_id(source), query, restricted=restricted)


@lru_cache(maxsize=None)
def _transition_table(n: int, query: int, restricted: bool):
    space = _space(n)
    src, dst, cost = [], [], []
    for sid in range(len(space.shapes)):
        for tr in space.transitions(sid, query, restricted=restricted):
            src.append(sid)
            dst.append(tr.target)
            cost.append(tr.cost)
    return (np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
            np.array(cost, dtype=np.int64))


@dataclass
class OptResult:
    cost: int
    trajectory: list[int]  # shape ids after each step, starting with the initial tree
    n: int

    def trees(self) -> list[Tree]:
        return [_space(self.n).shapes[i] for i in self.trajectory]

    def to_json(self) -> str:
        return json.dumps([t.to_string() for t in self.trees()])


def brute_force_opt(t0: Tree, x, *, restricted: bool = False) -> OptResult:
    """Minimum total cost of serving ``x`` from ``t0``, with one optimal trajectory."""
    xs = [int(q) for q in x]
    n = t0.n
    if sorted(t0.keys) != list(range(1, n + 1)):
        raise ValueError("initial tree must hold keys 1..n")
    if n > MAX_OPT_N or len(xs) > MAX_OPT_M:
        raise InstanceTooLargeError(f"brute force limited to n <= {MAX_OPT_N}, m <= {MAX_OPT_M}")
    for q in xs:
        if q not in t0:
            raise ValueError(f"query {q} outside the tree")
    space = _space(n)
    size = len(space.shapes)
    big = np.int64(1) << np.int64(40)
    dist = np.full(size, big, dtype=np.int64)
    start = space.shape_id(t0)
    dist[start] = 0
    preds = []
    for q in xs:
        src, dst, cost = _transition_table(n, q, restricted)
        cand = dist[src] + cost
        order = np.lexsort((cand, dst))
        first = np.ones(len(order), dtype=bool)
        first[1:] = dst[order][1:] != dst[order][:-1]
        pick = order[first]
        new = np.full(size, big, dtype=np.int64)
        pred = np.full(size, -1, dtype=np.int64)
        new[dst[pick]] = cand[pick]
        pred[dst[pick]] = src[pick]
        dist = new
        preds.append(pred)
    end = int(np.argmin(dist))
    path = [end]
    for pred in reversed(preds):
        path.append(int(pred[path[-1]]))
    path.reverse()
    return OptResult(int(dist[end]) if xs else 0, path, n)
