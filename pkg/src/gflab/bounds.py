"""Bounds that do not depend on GF: Wilber's alternation bound, optimal static trees, entropy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .sequences import as_segmented
from .tree import NIL, Tree

STATIC_OPT_MAX_N = 6000  # two (n+2)^2 tables, ~430 MB at the limit


class NotALeafError(ValueError):
    pass


class ResourceError(RuntimeError):
    pass


@dataclass
class WilberResult:
    alt_per_inner_node: dict[int, int]
    m: int

    @property
    def bound(self) -> Fraction:
        return self.m + Fraction(sum(self.alt_per_inner_node.values()), 2)


def _wilber_block(root, left, right, inner, block, last, alt):
    z = np.zeros(1, dtype=np.int64)
    _kernels.wilber_kernel(root, left, right, inner, block, z,
                           np.array([len(block)], dtype=np.int64), np.ones(1, dtype=np.int64),
                           last, alt)


def wilber1(x, ref_tree: Tree) -> WilberResult:
    """Alternations per inner node of ``ref_tree`` and the bound ``m + sum/2``.

    Repeated blocks are counted exactly: after two passes over a block the
    per-pass increment is fixed, since every node the block visits then
    starts from the block's own last side.
    """
    seq = as_segmented(x)
    size = len(ref_tree.left)
    leaf = np.zeros(size, dtype=np.bool_)
    for k in ref_tree.leaves():
        leaf[k] = True
    for block, reps in seq.segments:
        if reps and len(block):
            outside = (block < 1) | (block >= size)
            bad = outside | ~leaf[np.where(outside, 0, block)]
            if bad.any():
                raise NotALeafError(f"query {int(block[bad][0])} is not a leaf of the reference tree")
    inner = np.zeros(size, dtype=np.bool_)
    for k in ref_tree.keys:
        inner[k] = not ref_tree.is_leaf(k)
    left = np.asarray(ref_tree.left, dtype=np.int64)
    right = np.asarray(ref_tree.right, dtype=np.int64)
    last = np.full(size, -1, dtype=np.int64)
    alt = np.zeros(size, dtype=np.int64)
    for block, reps in seq.segments:
        if not reps or not len(block):
            continue
        _wilber_block(ref_tree.root, left, right, inner, block, last, alt)
        if reps >= 2:
            before = alt.copy()
            _wilber_block(ref_tree.root, left, right, inner, block, last, alt)
            alt += (reps - 2) * (alt - before)
    return WilberResult({k: int(alt[k]) for k in ref_tree.keys if inner[k]}, seq.length)


def wilber1_naive(x: Sequence[int], ref_tree: Tree) -> WilberResult:
    xs = [int(q) for q in as_segmented(x)]
    for q in xs:
        if q not in ref_tree or not ref_tree.is_leaf(q):
            raise NotALeafError(f"query {q} is not a leaf of the reference tree")
    alts = {}
    for u in ref_tree.keys:
        if ref_tree.is_leaf(u):
            continue
        below = set(ref_tree.subtree_keys(u))
        sides = [q > u for q in xs if q in below]
        alts[u] = sum(a != b for a, b in zip(sides, sides[1:]))
    return WilberResult(alts, len(xs))


# ---------------------------------------------------------------------------
# optimal static tree


@dataclass
class StaticDpResult:
    tree: Tree
    cost: int


def _weights(counts, n: int) -> np.ndarray:
    w = np.zeros(n + 2, dtype=np.int64)
    if isinstance(counts, Mapping):
        for k, c in counts.items():
            if not 1 <= k <= n:
                raise ValueError(f"key {k} outside 1..{n}")
            w[k] = c
    else:
        arr = np.asarray(counts, dtype=np.int64)[1: n + 1]
        w[1: 1 + len(arr)] = arr
    if (w < 0).any():
        raise ValueError("negative count")
    return w


def _tree_from_roots(root_tab, n: int) -> Tree:
    children: dict[int, tuple[int, int]] = {}
    top = int(root_tab[1, n])
    stack = [(1, n, top)]
    while stack:
        i, j, r = stack.pop()
        lc = int(root_tab[i, r - 1]) if r > i else NIL
        rc = int(root_tab[r + 1, j]) if r < j else NIL
        children[r] = (lc, rc)
        if lc:
            stack.append((i, r - 1, lc))
        if rc:
            stack.append((r + 1, j, rc))
    return Tree.from_links(top, children)


def static_opt(counts, n: int) -> StaticDpResult:
    """Minimum of ``sum count(k) * (depth(k) + 1)`` over BSTs on ``1..n``."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > STATIC_OPT_MAX_N:
        raise ResourceError(f"static_opt limited to n <= {STATIC_OPT_MAX_N}")
    w = _weights(counts, n)
    cost = np.zeros((n + 2, n + 2), dtype=np.int64)
    root = np.zeros((n + 2, n + 2), dtype=np.int64)
    _kernels.knuth_kernel(w, n, cost, root)
    return StaticDpResult(_tree_from_roots(root, n), int(cost[1, n]))


def static_opt_naive(counts, n: int) -> int:
    """Cubic interval DP without the root-monotonicity shortcut."""
    w = _weights(counts, n)
    pre = np.concatenate([[0], np.cumsum(w[1: n + 1])])
    best = [[0] * (n + 2) for _ in range(n + 2)]
    for length in range(1, n + 1):
        for i in range(1, n - length + 2):
            j = i + length - 1
            tot = int(pre[j] - pre[i - 1])
            best[i][j] = tot + min((best[i][r - 1] if r > i else 0) + (best[r + 1][j] if r < j else 0)
                                   for r in range(i, j + 1))
    return best[1][n]


def entropy_bits(frequencies: Sequence) -> float:
    fs = list(frequencies)
    if any(f <= 0 for f in fs):
        raise ValueError("frequencies must be positive")
    total = sum(fs)
    if not math.isclose(float(total), 1.0, rel_tol=0, abs_tol=1e-9):
        raise ValueError("frequencies must sum to 1")
    return float(sum(float(f) * -math.log2(f) for f in fs))
