"""Query sequences with run-length structure.

Many constructions here are ``prefix ∘ Z^reps ∘ suffix`` with ``reps`` in
the tens of thousands.  :class:`Segmented` keeps each block once together
with its repetition count, so a 65M-query instance costs a few kilobytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

INF_TIME = np.int64(1) << np.int64(62)


def _block(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int32)
    if arr.ndim != 1:
        raise ValueError("a query block must be one-dimensional")
    return arr


@dataclass(frozen=True)
class Segmented:
    """A concatenation of ``(block, reps)`` pairs."""

    segments: tuple[tuple[np.ndarray, int], ...]
    names: tuple[str, ...] = ()

    @classmethod
    def of(cls, *parts, names: Iterable[str] = ()) -> "Segmented":
        segs = []
        for p in parts:
            if isinstance(p, tuple) and len(p) == 2 and np.isscalar(p[1]):
                block, reps = p
            else:
                block, reps = p, 1
            if int(reps) < 0:
                raise ValueError("negative repetition count")
            segs.append((_block(block), int(reps)))
        names = tuple(names)
        if names and len(names) != len(segs):
            raise ValueError("one name per segment")
        return cls(tuple(segs), names)

    @property
    def length(self) -> int:
        return sum(len(b) * r for b, r in self.segments)

    def __len__(self) -> int:
        return self.length

    def segment_bounds(self) -> list[tuple[int, int]]:
        out, t = [], 0
        for b, r in self.segments:
            out.append((t, t + len(b) * r))
            t += len(b) * r
        return out

    def to_array(self) -> np.ndarray:
        parts = [np.tile(b, r) for b, r in self.segments]
        return np.concatenate(parts) if parts else np.zeros(0, np.int32)

    def __iter__(self) -> Iterator[int]:
        for b, r in self.segments:
            for _ in range(r):
                yield from (int(v) for v in b)

    def reversed(self) -> "Segmented":
        segs = tuple((b[::-1].copy(), r) for b, r in reversed(self.segments))
        return Segmented(segs, tuple(reversed(self.names)))

    def __add__(self, other: "Segmented") -> "Segmented":
        other = as_segmented(other)
        names = self.names + other.names if self.names and other.names else ()
        return Segmented(self.segments + other.segments, names)

    def max_key(self) -> int:
        return max((int(b.max()) for b, _ in self.segments if len(b) and _), default=0)

    def counts(self, n: int) -> np.ndarray:
        """Occurrences per key as an array of length ``n + 1``."""
        out = np.zeros(n + 1, np.int64)
        for b, r in self.segments:
            if len(b):
                out += np.bincount(b, minlength=n + 1)[: n + 1] * r
        return out


def as_segmented(x) -> Segmented:
    if isinstance(x, Segmented):
        return x
    if isinstance(x, np.ndarray):
        return Segmented(((_block(x), 1),))
    return Segmented(((_block(list(x)), 1),))


def reverse(x):
    """Reverse a list, array or :class:`Segmented` sequence."""
    if isinstance(x, Segmented):
        return x.reversed()
    if isinstance(x, np.ndarray):
        return x[::-1].copy()
    return list(x)[::-1]


@dataclass(frozen=True)
class KernelTables:
    """Flat arrays describing a :class:`Segmented` sequence for the kernels.

    ``next_local[p]`` is the offset of the next equal key in the same block
    (or -1); ``first_local[s, key]`` the first offset of ``key`` in block
    ``s`` (or -1); ``first_from[s, key]`` the global time of the first
    occurrence of ``key`` at or after the start of segment ``s``.
    """

    data: np.ndarray
    offsets: np.ndarray
    lengths: np.ndarray
    reps: np.ndarray
    next_local: np.ndarray
    first_local: np.ndarray
    first_from: np.ndarray


def kernel_tables(seq: Segmented, n: int) -> KernelTables:
    segs = [(b, r) for b, r in seq.segments]
    S = len(segs)
    data = np.concatenate([b for b, _ in segs]) if segs else np.zeros(0, np.int32)
    data = data.astype(np.int32)
    lengths = np.array([len(b) for b, _ in segs], dtype=np.int64)
    reps = np.array([r for _, r in segs], dtype=np.int64)
    offsets = np.zeros(S, dtype=np.int64)
    if S:
        offsets[1:] = np.cumsum(lengths)[:-1]
    if len(data) and (data.min() < 1 or data.max() > n):
        bad = data[(data < 1) | (data > n)][0]
        from .tree import KeyAbsentError
        raise KeyAbsentError(int(bad))
    next_local = np.full(len(data), -1, dtype=np.int64)
    first_local = np.full((S, n + 1), -1, dtype=np.int64)
    for s, (b, _) in enumerate(segs):
        if not len(b):
            continue
        order = np.argsort(b, kind="stable")
        sb = b[order]
        same = sb[:-1] == sb[1:]
        nl = np.full(len(b), -1, dtype=np.int64)
        nl[order[:-1][same]] = order[1:][same]
        next_local[offsets[s]: offsets[s] + len(b)] = nl
        uniq, first = np.unique(b, return_index=True)
        first_local[s, uniq] = first
    first_from = np.full((S + 1, n + 1), INF_TIME, dtype=np.int64)
    starts = np.zeros(S, dtype=np.int64)
    if S:
        starts[1:] = np.cumsum(lengths * reps)[:-1]
    for s in range(S - 1, -1, -1):
        row = first_from[s + 1].copy()
        if reps[s] > 0:
            present = first_local[s] >= 0
            row[present] = starts[s] + first_local[s][present]
        first_from[s] = row
    return KernelTables(data, offsets, lengths, reps, next_local, first_local, first_from)
