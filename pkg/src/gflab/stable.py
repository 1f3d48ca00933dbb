"""Stability-annotated full trees and the leaf sequences they induce.

Inner nodes carry a cyclic child-selection pattern:

* ``S_L`` / ``S_R`` - strongly stable, alternating, starting left / right;
* ``WL`` - weakly stable with left bias, ``[L, L, R]``: left-left grandchild,
  left-right grandchild, right child;
* ``WR`` - weakly stable with right bias, ``[R, R, L]``.

A weak node's favoured child (left for ``WL``, right for ``WR``) must be a
strongly stable inner node; its own alternation supplies the inner split.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import _kernels
from .tree import NIL, Tree, parse_tagged, validate_tree

L, R = 0, 1
PATTERNS = {"S_L": (L, R), "S_R": (R, L), "WL": (L, L, R), "WR": (R, R, L)}
STRONG = ("S_L", "S_R")
WEAK = ("WL", "WR")


class StabilityError(ValueError):
    pass


@dataclass(frozen=True)
class Annotation:
    tag: str
    cursor: int = 0

    def __post_init__(self):
        if self.tag not in PATTERNS:
            raise StabilityError(f"unknown stability tag {self.tag!r}")
        if not 0 <= self.cursor < len(PATTERNS[self.tag]):
            raise StabilityError("cursor outside pattern")

    @property
    def pattern(self) -> tuple[int, ...]:
        return PATTERNS[self.tag]

    @property
    def strong(self) -> bool:
        return self.tag in STRONG

    @property
    def next_side(self) -> int:
        return self.pattern[self.cursor]

    def text(self) -> str:
        return "!" + self.tag + (f"@{self.cursor}" if self.cursor else "")


@dataclass
class StabilityTree:
    tree: Tree
    annotations: dict[int, Annotation] = field(default_factory=dict)

    # -- text format --------------------------------------------------
    @classmethod
    def parse(cls, text: str) -> "StabilityTree":
        root, children, tags = parse_tagged(text)
        ann = {}
        for k, tag in tags.items():
            name, _, cur = tag.partition("@")
            ann[k] = Annotation(name, int(cur) if cur else 0)
        return cls(Tree.from_links(root, children), ann)

    def to_string(self) -> str:
        return self.tree.to_string({k: a.text() for k, a in self.annotations.items()})

    __str__ = to_string

    # -- structure ----------------------------------------------------
    def inner_nodes(self) -> list[int]:
        return [k for k in self.tree.inorder() if not self.tree.is_leaf(k)]

    def favored_child(self, key: int) -> int:
        a = self.annotations[key]
        if a.tag == "WL":
            return self.tree.left[key]
        if a.tag == "WR":
            return self.tree.right[key]
        return NIL

    def favored_children(self) -> set[int]:
        return {self.favored_child(k) for k, a in self.annotations.items() if not a.strong}

    def kind(self) -> str:
        """``"strong"``, ``"weak"`` or ``"mixed"``."""
        inner = self.inner_nodes()
        weak = sum(1 for k in inner if not self.annotations[k].strong)
        if weak == 0:
            return "strong"
        if 2 * weak == len(inner):
            return "weak"
        return "mixed"


def _required_favored_side(weak: Annotation) -> int:
    # the favoured child's next side given the weak node's cursor
    first = L if weak.tag == "WL" else R
    return first if weak.cursor in (0, 2) else 1 - first


def stability_problems(st: StabilityTree) -> list[str]:
    t = st.tree
    problems = []
    v = validate_tree(t, require_contiguous=False)
    if not v:
        return [v.reason]
    for k in t.keys:
        lc, rc = t.left[k], t.right[k]
        if (lc == NIL) != (rc == NIL):
            problems.append(f"node {k} has exactly one child")
            continue
        inner = lc != NIL
        if inner and k not in st.annotations:
            problems.append(f"inner node {k} is not annotated")
        if not inner and k in st.annotations:
            problems.append(f"leaf {k} is annotated")
    if problems:
        return problems
    for k, a in st.annotations.items():
        if a.strong:
            continue
        u = st.favored_child(k)
        if t.is_leaf(u):
            problems.append(f"favoured child {u} of weak node {k} is a leaf")
            continue
        ua = st.annotations[u]
        if not ua.strong:
            problems.append(f"favoured child {u} of weak node {k} is not strong")
        elif ua.next_side != _required_favored_side(a):
            problems.append(f"favoured child {u} is out of phase with {k}")
    return problems


def validate_stability(st: StabilityTree) -> bool:
    return not stability_problems(st)


def _require_valid(st: StabilityTree) -> None:
    bad = stability_problems(st)
    if bad:
        raise StabilityError("; ".join(bad))


# ---------------------------------------------------------------------------
# generation


def iter_queries(st: StabilityTree) -> Iterator[int]:
    """Infinite stream of queries, one root-to-leaf walk per query."""
    _require_valid(st)
    t = st.tree
    pat = {k: a.pattern for k, a in st.annotations.items()}
    cur = {k: a.cursor for k, a in st.annotations.items()}
    while True:
        v = t.root
        while v in pat:
            p = pat[v]
            side = p[cur[v]]
            cur[v] = (cur[v] + 1) % len(p)
            v = t.left[v] if side == L else t.right[v]
        yield v


class Generator:
    """Chunked compiled generation; cursor state persists across calls."""

    def __init__(self, st: StabilityTree):
        _require_valid(st)
        t = st.tree
        size = len(t.left)
        self.root = t.root
        self.left = np.asarray(t.left, dtype=np.int64)
        self.right = np.asarray(t.right, dtype=np.int64)
        self.pattern = np.zeros((size, 3), dtype=np.int64)
        self.plen = np.zeros(size, dtype=np.int64)
        self.cursor = np.zeros(size, dtype=np.int64)
        for k, a in st.annotations.items():
            self.pattern[k, : len(a.pattern)] = a.pattern
            self.plen[k] = len(a.pattern)
            self.cursor[k] = a.cursor

    def take(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.int32)
        _kernels.generate_kernel(self.root, self.left, self.right, self.pattern,
                                 self.plen, self.cursor, out)
        return out


def generate(st: StabilityTree, count: int) -> np.ndarray:
    return Generator(st).take(count)


# ---------------------------------------------------------------------------
# frequencies and periods


@dataclass(frozen=True)
class LeafProfile:
    leaf: int
    depth: int
    a: int  # strong ancestors that are not favoured children
    b: int  # weak ancestors
    frequency: Fraction

    @property
    def period(self) -> int:
        return 2 ** self.a * 3 ** self.b


def leaf_profiles(st: StabilityTree) -> list[LeafProfile]:
    """Exact access frequency and ``(a, b)`` counts of every leaf."""
    _require_valid(st)
    t = st.tree
    favored = st.favored_children()
    out = []
    stack = [(t.root, 0, 0, 0, Fraction(1))]
    while stack:
        v, d, a, b, f = stack.pop()
        if t.is_leaf(v):
            out.append(LeafProfile(v, d, a, b, f))
            continue
        ann = st.annotations[v]
        if ann.strong:
            na, nb = a + (v not in favored), b
            stack.append((t.left[v], d + 1, na, nb, f / 2))
            stack.append((t.right[v], d + 1, na, nb, f / 2))
        else:
            fav = st.favored_child(v)
            other = t.right[v] if ann.tag == "WL" else t.left[v]
            stack.append((fav, d + 1, a, b + 1, f * Fraction(2, 3)))
            stack.append((other, d + 1, a, b + 1, f / 3))
    out.sort(key=lambda p: p.leaf)
    return out


def atomic_length(st: StabilityTree) -> int:
    prof = leaf_profiles(st)
    return 2 ** max(p.a for p in prof) * 3 ** max(p.b for p in prof)


def predicted_static_cost(st: StabilityTree) -> Fraction:
    """Average cost of serving the induced sequence on the fixed tree."""
    return sum((p.frequency * (p.depth + 1) for p in leaf_profiles(st)), Fraction(0))


# ---------------------------------------------------------------------------
# independent check


def check_stability(x, st: StabilityTree, *, strict_phase: bool = False) -> bool:
    """Verify every inner node's restricted subsequence against its pattern.

    Strong nodes must alternate sides; weak nodes must cycle through
    (first favoured grandchild, second favoured grandchild, other child).
    With ``strict_phase`` the first visit must also match the declared
    cursor.  Queries must all be leaves.
    """
    t = st.tree
    last: dict[int, int] = {}
    for q in x:
        q = int(q)
        if q not in t or not t.is_leaf(q):
            return False
        v = t.root
        while not t.is_leaf(v):
            ann = st.annotations.get(v)
            if ann is None:
                return False
            side = L if q < v else R
            child = t.left[v] if side == L else t.right[v]
            if ann.strong:
                label = side
                expect_first = ann.next_side
            else:
                fav = st.favored_child(v)
                if child == fav:
                    fav_first = L if ann.tag == "WL" else R
                    inner_side = L if q < fav else R
                    label = 0 if inner_side == fav_first else 1
                else:
                    label = 2
                expect_first = ann.cursor
            prev = last.get(v)
            if prev is None:
                if strict_phase and label != expect_first:
                    return False
            elif ann.strong and label == prev:
                return False
            elif not ann.strong and label != (prev + 1) % 3:
                return False
            last[v] = label
            v = child
    return True


# ---------------------------------------------------------------------------
# hand-built and random instances


def strong_triple() -> StabilityTree:
    return StabilityTree.parse("2!S_L(1(-,-),3(-,-))")


def weak_five() -> StabilityTree:
    return StabilityTree.parse("2!WR(1(-,-),4!S_R(3(-,-),5(-,-)))")


def strong_seven() -> StabilityTree:
    """Seven nodes, three strong inner nodes; leaves 1, 3, 5, 7 get frequencies 1/2, 1/8, 1/8, 1/4."""
    return StabilityTree.parse("2!S_L(1(-,-),6!S_L(4!S_L(3(-,-),5(-,-)),7(-,-)))")


_CATALAN = [1]


def _catalan(i: int) -> int:
    while len(_CATALAN) <= i:
        j = len(_CATALAN)
        _CATALAN.append(_CATALAN[-1] * 2 * (2 * j - 1) // (j + 1))
    return _CATALAN[i]


def random_full_tree(inner: int, rng: random.Random) -> Tree:
    """Uniform full binary tree with ``inner`` inner nodes, keys in order."""
    # build the shape as parent pointers over positions, then relabel in order
    nodes: list[list[int]] = []  # [left, right] indices, -1 for leaf child slot

    def new():
        nodes.append([-1, -1])
        return len(nodes) - 1

    root = new()
    stack = [(root, inner)]
    while stack:
        idx, size = stack.pop()
        if size == 0:
            continue
        total = _catalan(size)
        pick = rng.randrange(total)
        for left_size in range(size):
            w = _catalan(left_size) * _catalan(size - 1 - left_size)
            if pick < w:
                break
            pick -= w
        lc, rc = new(), new()
        nodes[idx] = [lc, rc]
        stack.append((lc, left_size))
        stack.append((rc, size - 1 - left_size))
    order = []
    st2 = []
    v = root
    while st2 or v != -1:
        while v != -1:
            st2.append(v)
            v = nodes[v][0]
        v = st2.pop()
        order.append(v)
        v = nodes[v][1]
    key = {idx: i + 1 for i, idx in enumerate(order)}
    children = {}
    for idx, (lc, rc) in enumerate(nodes):
        children[key[idx]] = (key[lc] if lc != -1 else NIL, key[rc] if rc != -1 else NIL)
    return Tree.from_links(key[root], children)


def random_stability_tree(max_nodes: int, rng: random.Random, *, weak_prob: float = 1 / 3,
                          random_phase: bool = False) -> StabilityTree:
    """Random mixed-stable instance with at most ``max_nodes`` nodes.

    Each inner node not already a favoured child turns weak with
    probability ``weak_prob`` when it has an inner child to favour.
    """
    inner = rng.randrange(1, (max_nodes - 1) // 2 + 1)
    t = random_full_tree(inner, rng)
    ann: dict[int, Annotation] = {}
    forced: dict[int, int] = {}  # favoured child -> required next side
    for v in t.preorder():
        if t.is_leaf(v):
            continue
        if v in forced:
            side = forced[v]
            ann[v] = Annotation("S_L" if side == L else "S_R")
            continue
        choices = [tag for tag, c in (("WL", t.left[v]), ("WR", t.right[v])) if not t.is_leaf(c)]
        if choices and rng.random() < weak_prob:
            tag = rng.choice(choices)
            cursor = rng.randrange(3) if random_phase else 0
            a = Annotation(tag, cursor)
            ann[v] = a
            forced[t.left[v] if tag == "WL" else t.right[v]] = _required_favored_side(a)
        else:
            side = rng.choice((L, R)) if random_phase else L
            ann[v] = Annotation("S_L" if side == L else "S_R")
    return StabilityTree(t, ann)

