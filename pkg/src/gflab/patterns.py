"""Recursive tree families, their promoted static trees, and closed forms.

A ``(k, r)``-tree has a ``k``-node trunk: the root ``t1`` and a left chain
``t2 .. tk`` hanging from the root's right child.  ``tk``'s left child is the
single actual leaf; every other trunk slot (``t1.left`` and ``ti.right``)
holds a ``(k, r-1)``-tree.  In key order::

    A, t1, leaf, tk, Bk, t(k-1), B(k-1), ..., t2, B2
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .stable import Annotation, StabilityTree, leaf_profiles
from .tree import NIL, Tree, validate_tree


class PatternError(ValueError):
    pass


class ParameterDomainError(ValueError):
    pass


class KrMode(str, Enum):
    ALL_STRONG = "AllStrong"
    WEAK_TRUNK_ROOTS = "WeakTrunkRoots"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class KrTreeSpec:
    k: int
    r: int
    annotation_mode: KrMode = KrMode.ALL_STRONG
    custom: dict[int, Annotation] | None = field(default=None, hash=False, compare=False)

    def __post_init__(self):
        if self.k < 2 or self.r < 0:
            raise PatternError("need k >= 2 and r >= 0")
        object.__setattr__(self, "annotation_mode", KrMode(self.annotation_mode))
        if self.annotation_mode is KrMode.WEAK_TRUNK_ROOTS and self.k != 2:
            raise PatternError("weak trunk roots are defined for k = 2 only")
        if self.annotation_mode is KrMode.CUSTOM and self.custom is None:
            raise PatternError("custom mode needs an annotation map")

    @classmethod
    def from_json(cls, d: dict) -> "KrTreeSpec":
        return cls(int(d["k"]), int(d["r"]), KrMode(d.get("mode", "AllStrong")))

    def to_json(self) -> dict:
        return {"k": self.k, "r": self.r, "mode": self.annotation_mode.value}


def kr_size(k: int, r: int) -> int:
    n = 1
    for _ in range(r):
        n = (k + 1) + k * n
    return n


def kr_size_closed(k: int, r: int) -> Fraction:
    c = Fraction(2, k - 1)
    return (2 + c) * k ** r - (1 + c)


@dataclass
class KrLevel:
    """Role assignment of one recursion level (``leaf`` alone when r = 0)."""

    leaf: int
    trunk: list[int] = field(default_factory=list)  # t1..tk
    a: "KrLevel | None" = None
    b: dict[int, "KrLevel"] = field(default_factory=dict)  # i -> B_i, 2 <= i <= k

    @property
    def root(self) -> int:
        return self.trunk[0] if self.trunk else self.leaf


def build_kr_tree(spec: KrTreeSpec) -> StabilityTree:
    k = spec.k
    children: dict[int, tuple[int, int]] = {}
    counter = 0

    def new() -> int:
        nonlocal counter
        counter += 1
        return counter

    def rec(r: int) -> KrLevel:
        if r == 0:
            key = new()
            children[key] = (NIL, NIL)
            return KrLevel(key)
        a = rec(r - 1)
        t = [0] * (k + 1)
        b: dict[int, KrLevel] = {}
        t[1] = new()
        leaf = new()
        children[leaf] = (NIL, NIL)
        for i in range(k, 1, -1):
            t[i] = new()
            b[i] = rec(r - 1)
        children[t[1]] = (a.root, t[2])
        for i in range(2, k):
            children[t[i]] = (t[i + 1], b[i].root)
        children[t[k]] = (leaf, b[k].root)
        return KrLevel(leaf, t[1:], a, b)

    top = rec(spec.r)
    tree = Tree.from_links(top.root, children)
    ann: dict[int, Annotation] = {}
    for key in tree.keys:
        if not tree.is_leaf(key):
            ann[key] = Annotation("S_L")
    if spec.annotation_mode is KrMode.WEAK_TRUNK_ROOTS:
        stack = [top]
        while stack:
            lv = stack.pop()
            if lv.trunk:
                ann[lv.trunk[0]] = Annotation("WR")
                ann[lv.trunk[1]] = Annotation("S_R")
                stack.append(lv.a)
                stack.extend(lv.b.values())
    elif spec.annotation_mode is KrMode.CUSTOM:
        ann.update(spec.custom)
    return StabilityTree(tree, ann)


def kr_structure(t: Tree, k: int | None = None) -> tuple[int, int, KrLevel]:
    """Recover ``(k, r, roles)`` from a tree, rejecting anything else."""
    if k is None:
        v = t.root
        if t.is_leaf(v):
            return 2, 0, KrLevel(v)
        v = t.right[v]
        k = 2
        while v != NIL and not t.is_leaf(t.left[v]):
            v = t.left[v]
            k += 1
        if v == NIL:
            raise PatternError("not a (k, r)-tree")

    def rec(v: int) -> tuple[int, KrLevel]:
        if v == NIL:
            raise PatternError("not a (k, r)-tree: missing child")
        if t.is_leaf(v):
            return 0, KrLevel(v)
        trunk = [v]
        for _ in range(k - 1):
            nxt = t.right[trunk[0]] if len(trunk) == 1 else t.left[trunk[-1]]
            if nxt == NIL or t.is_leaf(nxt):
                raise PatternError("not a (k, r)-tree: short trunk")
            trunk.append(nxt)
        leaf = t.left[trunk[-1]]
        if leaf == NIL or not t.is_leaf(leaf):
            raise PatternError("not a (k, r)-tree: trunk does not end at a leaf")
        ra, a = rec(t.left[v])
        b = {}
        for i in range(2, k + 1):
            ri, b[i] = rec(t.right[trunk[i - 1]])
            if ri != ra:
                raise PatternError("not a (k, r)-tree: uneven recursion")
        return ra + 1, KrLevel(leaf, trunk, a, b)

    r, top = rec(t.root)
    return k, r, top


# ---------------------------------------------------------------------------
# promotion


@dataclass(frozen=True)
class LeafPromotion:
    leaf: int
    old_depth: int
    new_depth: int
    frequency: Fraction


@dataclass
class PromotionReport:
    per_leaf: list[LeafPromotion]
    average: Fraction

    @classmethod
    def between(cls, st: StabilityTree, new: Tree) -> "PromotionReport":
        new_depths = new.depths()
        rows = [LeafPromotion(p.leaf, p.depth, new_depths[p.leaf], p.frequency)
                for p in leaf_profiles(st)]
        avg = sum((r.frequency * (r.old_depth - r.new_depth) for r in rows), Fraction(0))
        return cls(rows, avg)


class _Links:
    def __init__(self):
        self.left: dict[int, int] = {}
        self.right: dict[int, int] = {}

    def node(self, key: int) -> None:
        self.left[key] = NIL
        self.right[key] = NIL

    def minimum(self, v: int) -> int:
        while self.left[v] != NIL:
            v = self.left[v]
        return v

    def maximum(self, v: int) -> int:
        while self.right[v] != NIL:
            v = self.right[v]
        return v

    def pop_minimum(self, v: int) -> tuple[int, int]:
        """Splice out the minimum of the subtree at ``v``; return (min, new root)."""
        parent = NIL
        m = v
        while self.left[m] != NIL:
            parent, m = m, self.left[m]
        if parent == NIL:
            root = self.right[m]
        else:
            self.left[parent] = self.right[m]
            root = v
        self.right[m] = NIL
        return m, root

    def tree(self, root: int) -> Tree:
        return Tree.from_links(root, {k: (self.left[k], self.right[k]) for k in self.left})


def _promote_level(lv: KrLevel, k: int, out: _Links) -> int:
    if not lv.trunk:
        out.node(lv.leaf)
        return lv.leaf
    t = [0] + lv.trunk  # 1-based
    for key in lv.trunk + [lv.leaf]:
        out.node(key)
    a = _promote_level(lv.a, k, out)
    out.right[out.maximum(a)] = t[1]
    out.left[lv.leaf] = a
    block = _promote_level(lv.b[k], k, out)
    out.left[out.minimum(block)] = t[k]
    for i in range(k - 1, 1, -1):
        out.right[out.maximum(block)] = t[i]
        m, rest = out.pop_minimum(_promote_level(lv.b[i], k, out))
        out.left[m] = block
        out.right[m] = rest
        block = m
    out.right[lv.leaf] = block
    return lv.leaf


def promote_kr(st: StabilityTree) -> tuple[Tree, PromotionReport]:
    """Order-preserving static tree with the recursive promotion scheme.

    Per level: the actual leaf becomes the root, ``promote(A)`` its left
    child with ``t1`` under A's maximum, and the right side nests blocks,
    the leftmost node ``m_i`` of each ``B_i`` (``2 <= i < k``) rising to
    the vacated trunk slot above the previous block.
    """
    k, _, top = kr_structure(st.tree)
    out = _Links()
    root = _promote_level(top, k, out)
    new = out.tree(root)
    if not validate_tree(new, universe=set(st.tree.keys)):
        raise AssertionError("promotion broke the search order")
    return new, PromotionReport.between(st, new)


def build_chain_tree(n_param: int) -> StabilityTree:
    """Strongly stable chain: inner 2, 4, .., 2n going right; leaf 2i-1 left of 2i."""
    if n_param < 1:
        raise PatternError("chain needs n >= 1")
    children = {}
    for i in range(1, n_param + 1):
        children[2 * i] = (2 * i - 1, 2 * i + 2 if i < n_param else 2 * n_param + 1)
        children[2 * i - 1] = (NIL, NIL)
    children[2 * n_param + 1] = (NIL, NIL)
    tree = Tree.from_links(2, children)
    return StabilityTree(tree, {2 * i: Annotation("S_L") for i in range(1, n_param + 1)})


def promote_chain(st: StabilityTree) -> tuple[Tree, PromotionReport]:
    """Lift every leaf but the last by one.

    Odd keys form a right chain and ``2i`` hangs left of ``2i+1``.
    """
    n_param = (st.tree.n - 1) // 2
    if n_param < 1 or st.tree != build_chain_tree(n_param).tree:
        raise PatternError("not a chain tree")
    children = {}
    for i in range(n_param + 1):
        odd = 2 * i + 1
        children[odd] = (odd - 1 if i > 0 else NIL, odd + 2 if i < n_param else NIL)
        if i > 0:
            children[odd - 1] = (NIL, NIL)
    new = Tree.from_links(1, children)
    return new, PromotionReport.between(st, new)


# ---------------------------------------------------------------------------
# recurrences


@dataclass(frozen=True)
class RecurrenceParams:
    """``b_r = alpha * b_{r-1} + beta + gamma * r / 2^r`` from ``b_0``."""

    b0: Fraction
    alpha: Fraction
    beta: Fraction
    gamma: Fraction = Fraction(0)


def iterate_recurrence(p: RecurrenceParams, r: int) -> Fraction:
    b = Fraction(p.b0)
    for i in range(1, r + 1):
        b = p.alpha * b + p.beta + p.gamma * Fraction(i, 2 ** i)
    return b


def closed_form(p: RecurrenceParams, r: int) -> Fraction:
    if r < 0:
        raise ParameterDomainError("r must be non-negative")
    a, beta, g = Fraction(p.alpha), Fraction(p.beta), Fraction(p.gamma)
    if a == 1:
        raise ParameterDomainError("alpha = 1 has no closed form here")
    if g != 0 and a == Fraction(1, 2):
        raise ParameterDomainError("alpha = 1/2 with gamma != 0")
    ar = a ** r
    half_r = Fraction(1, 2 ** r)
    out = beta / (1 - a) * (1 - ar) + ar * Fraction(p.b0)
    if g:
        out += 2 * a * g / (2 * a - 1) ** 2 * (ar - half_r) - g / (2 * a - 1) * r * half_r
    return out


def strong_alpha(k: int) -> Fraction:
    return 1 - Fraction(1, 2 ** k)


def strong_beta(k: int) -> Fraction:
    """Per-level GF cost constant, summed term by term."""
    return sum((Fraction(j, 2 ** j) for j in range(1, k + 1)), Fraction(0)) + Fraction(k + 1, 2 ** k)


def predicted_gf_cost_strong(k: int, r: int) -> Fraction:
    a = strong_alpha(k)
    return 2 ** k * strong_beta(k) * (1 - a ** r) + a ** r


def promotion_params(k: int, gamma: Fraction) -> RecurrenceParams:
    return RecurrenceParams(Fraction(0), strong_alpha(k), Fraction(k + 1, 2 ** k), gamma)


def predicted_promotion_strong(k: int, r: int) -> Fraction:
    """Promotion lower bound from the recurrence with ``gamma = (1 - 2^(2-k)) / 2``."""
    gamma = Fraction(1, 2) * (1 - Fraction(4, 2 ** k))
    return closed_form(promotion_params(k, gamma), r)


def predicted_promotion_scheme(k: int, r: int) -> Fraction:
    """Exact average promotion of :func:`promote_kr` on all-strong frequencies.

    The leftmost leaf of a ``(k, r-1)`` subtree has relative frequency
    ``2^-(r-1)``, giving ``gamma = 1 - 2^(2-k)``.
    """
    gamma = 1 - Fraction(4, 2 ** k)
    return closed_form(promotion_params(k, gamma), r)


def promotion_main_term(k: int, r: int) -> Fraction:
    return (k + 1) * (1 - strong_alpha(k) ** r)


def predicted_gap(k: int, r: int, mode: str = "Strong", *, exact: bool = True) -> Fraction:
    """Per-query gap between GF and the promoted static tree.

    ``Strong`` uses the promotion recurrence (with its small ``delta`` term
    unless ``exact`` is false); ``Mixed`` is ``k (1 - (1 - 3^-k)^r)``.
    """
    if mode == "Strong":
        return predicted_promotion_strong(k, r) if exact else promotion_main_term(k, r)
    if mode == "Mixed":
        return k * (1 - (1 - Fraction(1, 3 ** k)) ** r)
    raise ValueError(f"unknown mode {mode!r}")


def fib_gf_cost(r: int) -> Fraction:
    """GF average cost on the weak ``(2, r)``-tree sequence."""
    return closed_form(RecurrenceParams(Fraction(1), Fraction(2, 3), Fraction(2)), r)


def fib_promotion(r: int) -> Fraction:
    return closed_form(RecurrenceParams(Fraction(0), Fraction(2, 3), Fraction(1)), r)
