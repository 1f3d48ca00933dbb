"""Prefixes that force GF into a chosen tree, and the gap instances built from them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .patterns import KrMode, KrTreeSpec, build_kr_tree, promote_kr
from .sequences import Segmented
from .stable import atomic_length, generate
from .tree import NIL, Tree, tree_depth


@dataclass
class EnforcePlan:
    layers: list[list[int]]
    sequence: Segmented

    def steps(self) -> list[list[int]]:
        return [[k for k in layer for _ in (0, 1)] + list(layer) for layer in self.layers]


def strip_layers(target: Tree) -> list[list[int]]:
    """Inner nodes of ``T``, of ``T`` minus its leaves, and so on."""
    height = {}
    for v in reversed(target.preorder()):
        hs = [height[c] for c in target.children(v) if c != NIL]
        height[v] = 1 + max(hs) if hs else 0
    h = max(height.values())
    # a node survives i strippings iff its subtree height is at least i
    return [sorted(k for k, hv in height.items() if hv >= i + 1) for i in range(h)]


def enforce_prefix(target: Tree) -> EnforcePlan:
    """Each layer, ascending: every key twice, then every key once."""
    layers = strip_layers(target)
    flat = [k for layer in layers for k in [k for k in layer for _ in (0, 1)] + layer]
    return EnforcePlan(layers, Segmented.of(np.array(flat, dtype=np.int32), names=["S(T)"]))


def enforce_length_bounds(target: Tree) -> tuple[float, float]:
    """The two upper bounds on the prefix length: depth-based and quadratic."""
    n = target.n
    return 3 * n * (tree_depth(target) - (n.bit_length() - 1) + 1), 1.5 * n * (n - 1)


@dataclass
class GapInstance:
    sequence: Segmented
    n: int
    components: tuple[str, ...]
    marked: tuple[tuple[int, int], ...] | None = None  # half-open index ranges
    trees: dict[str, Tree] = field(default_factory=dict)
    block: np.ndarray | None = None

    def __post_init__(self):
        if self.marked is not None:
            prev = 0
            m = self.sequence.length
            for s, e in self.marked:
                if not prev <= s <= e <= m:
                    raise ValueError("marked ranges must be increasing and in bounds")
                prev = e

    def component_bounds(self) -> list[tuple[str, int, int]]:
        return [(name, s, e) for name, (s, e) in zip(self.components, self.sequence.segment_bounds())]

    def marked_indices(self) -> np.ndarray:
        if self.marked is None:
            return np.arange(self.sequence.length)
        return np.concatenate([np.arange(s, e) for s, e in self.marked] or [np.zeros(0, int)])

    def marked_sequence(self) -> Segmented:
        """The marked subsequence, keeping repetition structure."""
        if self.marked is None:
            return self.sequence
        keep = []
        names = []
        for (s, e), (b, r), name in zip(self.sequence.segment_bounds(), self.sequence.segments,
                                       self.components):
            if any(ms <= s and e <= me for ms, me in self.marked):
                keep.append((b, r))
                names.append(name)
            elif any(ms < e and s < me for ms, me in self.marked):
                raise ValueError("marked ranges must align with components")
        return Segmented(tuple(keep), tuple(names))

    def export(self, stem: str | Path) -> tuple[Path, Path]:
        """Write ``stem.bin`` (little-endian int32 keys) and ``stem.json``."""
        stem = Path(stem)
        binp, jsonp = stem.with_suffix(".bin"), stem.with_suffix(".json")
        with open(binp, "wb") as f:
            for b, r in self.sequence.segments:
                chunk = b.astype("<i4").tobytes()
                for _ in range(r):
                    f.write(chunk)
        meta = {"n": self.n, "length": self.sequence.length,
                "components": [{"name": nm, "start": s, "stop": e}
                               for nm, s, e in self.component_bounds()],
                "marked": [list(p) for p in self.marked] if self.marked is not None else None}
        jsonp.write_text(json.dumps(meta, indent=1) + "\n")
        return binp, jsonp


def _fib_parts(r: int):
    st = build_kr_tree(KrTreeSpec(2, r, KrMode.WEAK_TRUNK_ROOTS))
    z = generate(st, atomic_length(st))
    t_q, _ = promote_kr(st)
    return st, z, t_q


def build_multiplicative_instance(r: int, reps: int) -> GapInstance:
    """``S(T_P) Z^reps`` for the weak ``(2, r)``-tree ``T_P``, from the right spine."""
    if r < 1 or reps < 1:
        raise ValueError("need r >= 1 and reps >= 1")
    st, z, t_q = _fib_parts(r)
    p = enforce_prefix(st.tree).sequence.segments[0][0]
    seq = Segmented.of(p, (z, reps), names=["P", "Z^reps"])
    return GapInstance(seq, st.tree.n, seq.names,
                       trees={"T_P": st.tree, "T_Q": t_q, "T0": Tree.right_spine(st.tree.n)},
                       block=z)


def build_subsequence_instance(r: int, reps: int) -> GapInstance:
    """``X = P Q Z^reps`` with ``X' = P Z^reps`` marked."""
    if r < 1 or reps < 0:
        raise ValueError("need r >= 1 and reps >= 0")
    st, z, t_q = _fib_parts(r)
    p = enforce_prefix(st.tree).sequence.segments[0][0]
    q = enforce_prefix(t_q).sequence.segments[0][0]
    seq = Segmented.of(p, q, (z, reps), names=["P", "Q", "Z^reps"])
    lp, lq = len(p), len(q)
    marked = ((0, lp), (lp + lq, lp + lq + len(z) * reps))
    return GapInstance(seq, st.tree.n, seq.names, marked,
                       trees={"T_P": st.tree, "T_Q": t_q, "T0": Tree.right_spine(st.tree.n)},
                       block=z)


def build_reversal_instance(r: int, reps: int) -> GapInstance:
    """``X = Q rev(Z)^(reps+1) rev(P)``; its reverse is ``P Z^(reps+1) rev(Q)``."""
    if r < 1 or reps < 1:
        raise ValueError("need r >= 1 and reps >= 1")
    st, z, t_q = _fib_parts(r)
    p = enforce_prefix(st.tree).sequence.segments[0][0]
    q = enforce_prefix(t_q).sequence.segments[0][0]
    seq = Segmented.of(q, (z[::-1].copy(), reps + 1), p[::-1].copy(),
                       names=["Q", "rev(Z)^(reps+1)", "rev(P)"])
    return GapInstance(seq, st.tree.n, seq.names,
                       trees={"T_P": st.tree, "T_Q": t_q, "T0": Tree.right_spine(st.tree.n)},
                       block=z)
