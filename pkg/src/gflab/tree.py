"""Binary search trees over integer keys, stored as key-indexed link arrays.

A tree over keys ``1..n`` keeps three lists of length ``max_key + 1``:
``left``, ``right`` and ``parent``, where ``0`` means "no node".  All
traversals are iterative so chains of tens of thousands of nodes are fine.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NIL = 0


class KeyAbsentError(KeyError):
    pass


class RegionError(ValueError):
    pass


class Tree:
    """A binary search tree whose nodes are identified by their keys."""

    __slots__ = ("root", "left", "right", "parent", "keys")

    def __init__(self, root: int, left: list[int], right: list[int],
                 parent: list[int], keys: Sequence[int]):
        self.root = root
        self.left = left
        self.right = right
        self.parent = parent
        self.keys = tuple(keys)

    # -- construction -------------------------------------------------
    @classmethod
    def from_links(cls, root: int, children: dict[int, tuple[int, int]]) -> "Tree":
        """Build from ``{key: (left, right)}`` with 0 for a missing child."""
        keys = sorted(children)
        size = (keys[-1] if keys else 0) + 1
        left = [NIL] * size
        right = [NIL] * size
        parent = [NIL] * size
        for k, (lc, rc) in children.items():
            left[k], right[k] = lc, rc
            if lc:
                parent[lc] = k
            if rc:
                parent[rc] = k
        return cls(root, left, right, parent, keys)

    @classmethod
    def parse(cls, text: str) -> "Tree":
        """Parse the canonical ``key(left,right)`` form, ``-`` for no child."""
        root, children, _ = parse_tagged(text)
        return cls.from_links(root, children)

    @classmethod
    def from_parent_map(cls, parent_of: dict[int, int]) -> "Tree":
        children: dict[int, list[int]] = {k: [NIL, NIL] for k in parent_of}
        root = NIL
        for k, p in parent_of.items():
            if p == NIL:
                root = k
            elif k < p:
                children[p][0] = k
            else:
                children[p][1] = k
        return cls.from_links(root, {k: (v[0], v[1]) for k, v in children.items()})

    @classmethod
    def right_spine(cls, n: int) -> "Tree":
        return cls.from_links(1, {k: (NIL, k + 1 if k < n else NIL) for k in range(1, n + 1)})

    @classmethod
    def balanced(cls, keys: Sequence[int]) -> "Tree":
        keys = sorted(keys)
        children: dict[int, tuple[int, int]] = {}

        def mid(lo, hi):
            return keys[(lo + hi) // 2] if lo <= hi else NIL

        stack = [(0, len(keys) - 1)]
        while stack:
            lo, hi = stack.pop()
            if lo > hi:
                continue
            m = (lo + hi) // 2
            children[keys[m]] = (mid(lo, m - 1), mid(m + 1, hi))
            stack.append((lo, m - 1))
            stack.append((m + 1, hi))
        return cls.from_links(mid(0, len(keys) - 1), children)

    def copy(self) -> "Tree":
        return Tree(self.root, self.left[:], self.right[:], self.parent[:], self.keys)

    # -- queries ------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.keys)

    def __contains__(self, key: int) -> bool:
        return 0 < key < len(self.left) and (key == self.root or self.parent[key] != NIL)

    def children(self, key: int) -> tuple[int, int]:
        return self.left[key], self.right[key]

    def is_leaf(self, key: int) -> bool:
        return self.left[key] == NIL and self.right[key] == NIL

    def path(self, key: int) -> list[int]:
        """Keys on the root-to-``key`` search path, root first."""
        out = []
        v = self.root
        while v != NIL:
            out.append(v)
            if key == v:
                return out
            v = self.left[v] if key < v else self.right[v]
        raise KeyAbsentError(key)

    def inorder(self, start: int | None = None) -> list[int]:
        out = []
        stack = []
        v = self.root if start is None else start
        while stack or v != NIL:
            while v != NIL:
                stack.append(v)
                v = self.left[v]
            v = stack.pop()
            out.append(v)
            v = self.right[v]
        return out

    def preorder(self, start: int | None = None) -> list[int]:
        out = []
        stack = [self.root if start is None else start]
        while stack:
            v = stack.pop()
            if v == NIL:
                continue
            out.append(v)
            stack.append(self.right[v])
            stack.append(self.left[v])
        return out

    def subtree_keys(self, key: int) -> list[int]:
        return self.inorder(key)

    def depths(self) -> dict[int, int]:
        d = {self.root: 0}
        for v in self.preorder():
            for c in (self.left[v], self.right[v]):
                if c != NIL:
                    d[c] = d[v] + 1
        return d

    def depth_array(self) -> np.ndarray:
        """Depth per key as an int64 array indexed by key (-1 if absent)."""
        arr = np.full(len(self.left), -1, dtype=np.int64)
        for k, d in self.depths().items():
            arr[k] = d
        return arr

    def leaves(self) -> list[int]:
        return [k for k in self.inorder() if self.is_leaf(k)]

    def min_key(self, start: int) -> int:
        while self.left[start] != NIL:
            start = self.left[start]
        return start

    def max_key(self, start: int) -> int:
        while self.right[start] != NIL:
            start = self.right[start]
        return start

    # -- serialisation ------------------------------------------------
    def to_string(self, tags: dict[int, str] | None = None) -> str:
        parts: list[str] = []
        stack: list = [self.root]
        while stack:
            item = stack.pop()
            if isinstance(item, str):
                parts.append(item)
            elif item == NIL:
                parts.append("-")
            else:
                parts.append(str(item))
                if tags and item in tags:
                    parts.append(tags[item])
                parts.append("(")
                stack.extend([")", self.right[item], ",", self.left[item]])
        return "".join(parts)

    __str__ = to_string

    def __repr__(self) -> str:
        return f"Tree({self.to_string()!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        if self.keys != other.keys or self.root != other.root:
            return False
        return all(self.left[k] == other.left[k] and self.right[k] == other.right[k]
                   for k in self.keys)

    def __hash__(self) -> int:
        return hash(self.to_string())

    def fingerprint(self) -> int:
        return fingerprint_string(self.to_string())


def fingerprint_string(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


_TOKEN = re.compile(r"\s*(?:(\d+)(![A-Za-z_]+(?:@\d+)?)?\(|(-)|(,)|(\)))")


def parse_tagged(text: str) -> tuple[int, dict[int, tuple[int, int]], dict[int, str]]:
    """Parse ``key[!TAG](left,right)`` text into root, child links and tags."""
    children: dict[int, list[int]] = {}
    tags: dict[int, str] = {}
    stack: list[list[int]] = []  # [key, slot, commas_seen]
    root = NIL
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad tree text at offset {pos}: {text[pos:pos + 20]!r}")
        pos = m.end()
        key, tag, dash, comma, close = m.groups()
        if key is not None:
            k = int(key)
            if k in children:
                raise ValueError(f"duplicate key {k}")
            children[k] = [NIL, NIL]
            if tag:
                tags[k] = tag[1:]
            if stack:
                children[stack[-1][0]][stack[-1][1]] = k
            elif root == NIL:
                root = k
            else:
                raise ValueError("more than one root")
            stack.append([k, 0, 0])
        elif comma:
            if not stack or stack[-1][2]:
                raise ValueError("unexpected ','")
            stack[-1][1] = 1
            stack[-1][2] = 1
        elif close:
            if not stack or not stack[-1][2]:
                raise ValueError("unexpected ')'")
            stack.pop()
        elif dash and not stack:
            raise ValueError("'-' outside a node")
    if stack or root == NIL:
        raise ValueError("incomplete tree text")
    return root, {k: (v[0], v[1]) for k, v in children.items()}, tags


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Validation:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate_tree(t: Tree, *, universe: Iterable[int] | None = None,
                  require_contiguous: bool = True) -> Validation:
    """Check symmetric order, parent links, connectivity and the key set.

    By default the key set must be exactly ``1..n``; pass
    ``require_contiguous=False`` for a tree over an arbitrary key subset.
    """
    keys = t.keys
    if len(set(keys)) != len(keys):
        return Validation(False, "duplicate keys")
    if universe is not None:
        if sorted(universe) != list(keys):
            return Validation(False, "key set differs from universe")
    elif require_contiguous and list(keys) != list(range(1, len(keys) + 1)):
        return Validation(False, "keys are not exactly 1..n")
    keyset = set(keys)
    if t.root not in keyset:
        return Validation(False, "root is not a key")
    if t.parent[t.root] != NIL:
        return Validation(False, "root has a parent")
    seen = set()
    # iterative walk carrying the open key interval
    stack = [(t.root, None, None)]
    while stack:
        v, lo, hi = stack.pop()
        if v in seen:
            return Validation(False, f"cycle or shared node at {v}")
        seen.add(v)
        if (lo is not None and v <= lo) or (hi is not None and v >= hi):
            return Validation(False, f"order violation at {v}")
        for c, nlo, nhi in ((t.left[v], lo, v), (t.right[v], v, hi)):
            if c == NIL:
                continue
            if c not in keyset:
                return Validation(False, f"child {c} of {v} is not a key")
            if t.parent[c] != v:
                return Validation(False, f"parent link of {c} is not {v}")
            stack.append((c, nlo, nhi))
    if seen != keyset:
        return Validation(False, f"{len(keyset - seen)} keys unreachable from root")
    return Validation(True)


def depth(t: Tree, key: int) -> int:
    return len(t.path(key)) - 1


def tree_depth(t: Tree) -> int:
    return max(t.depths().values())


# ---------------------------------------------------------------------------
# costs


@dataclass
class CostReport:
    """Service cost of one run.

    ``per_step`` may be ``None`` for runs that skip per-query bookkeeping;
    ``segment_totals`` and ``segment_restructures`` split the run along the
    segments of a :class:`~gflab.sequences.Segmented` input.
    """

    total: int
    m: int
    restructures: int = 0
    per_step: np.ndarray | None = None
    segment_totals: tuple[int, ...] = ()
    segment_restructures: tuple[int, ...] = ()
    segment_lengths: tuple[int, ...] = ()
    restructured_steps: np.ndarray | None = None

    @property
    def average(self):
        from fractions import Fraction
        return Fraction(self.total, self.m) if self.m else Fraction(0)

    def segment_average(self, index: int):
        from fractions import Fraction
        return Fraction(self.segment_totals[index], self.segment_lengths[index])


def serve_static(t: Tree, x, *, keep_steps: bool = True) -> CostReport:
    """Serve ``x`` without restructuring: each query costs depth + 1."""
    from .sequences import as_segmented

    seq = as_segmented(x)
    d = t.depth_array()
    totals = []
    steps = []
    for block, reps in seq.segments:
        if len(block) == 0:
            totals.append(0)
            continue
        inside = (block > 0) & (block < len(d))
        if not inside.all():
            raise KeyAbsentError(int(block[~inside][0]))
        absent = d[block] < 0
        if absent.any():
            raise KeyAbsentError(int(block[absent][0]))
        cost = d[block] + 1
        totals.append(int(cost.sum()) * reps)
        if keep_steps:
            steps.append(np.tile(cost, reps))
    per_step = (np.concatenate(steps) if steps else np.zeros(0, np.int64)) if keep_steps else None
    return CostReport(total=sum(totals), m=seq.length, restructures=0, per_step=per_step,
                      segment_totals=tuple(totals),
                      segment_restructures=tuple(0 for _ in totals),
                      segment_lengths=tuple(len(b) * r for b, r in seq.segments))


def static_cost_from_counts(t: Tree, counts: dict[int, int]) -> int:
    d = t.depths()
    return sum(c * (d[k] + 1) for k, c in counts.items())


# ---------------------------------------------------------------------------
# region rebuild


def rebuild_region(t: Tree, keys: Iterable[int], shape: Tree, *, in_place: bool = False) -> Tree:
    """Replace the connected region ``keys`` of ``t`` by ``shape``.

    Subtrees hanging off the region are reattached at the single empty slot
    of ``shape`` whose key interval contains them.
    """
    region = sorted(set(keys))
    if not region:
        return t if in_place else t.copy()
    if sorted(shape.keys) != region:
        raise RegionError("shape keys do not match region")
    inside = set(region)
    tops = []
    for v in region:
        if v not in t:
            raise KeyAbsentError(v)
        p = t.parent[v] if v != t.root else NIL
        if p == NIL or p not in inside:
            tops.append(v)
    if len(tops) != 1:
        raise RegionError("region is not connected")
    top = tops[0]
    out = t if in_place else t.copy()
    above = out.parent[top] if top != out.root else NIL

    # gap i lies between region[i-1] and region[i]
    gaps = [NIL] * (len(region) + 1)
    index = {v: i for i, v in enumerate(region)}
    for v in region:
        i = index[v]
        lc, rc = t.left[v], t.right[v]
        if lc != NIL and lc not in inside:
            gaps[i] = lc
        if rc != NIL and rc not in inside:
            gaps[i + 1] = rc
    for v in region:
        i = index[v]
        nl = shape.left[v] if shape.left[v] != NIL else gaps[i]
        nr = shape.right[v] if shape.right[v] != NIL else gaps[i + 1]
        out.left[v], out.right[v] = nl, nr
        if nl != NIL:
            out.parent[nl] = v
        if nr != NIL:
            out.parent[nr] = v
    new_top = shape.root
    out.parent[new_top] = above
    if above == NIL:
        out.root = new_top
    elif top == out.left[above]:
        out.left[above] = new_top
    else:
        out.right[above] = new_top
    return out
