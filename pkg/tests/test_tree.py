import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gflab.opt import all_bsts
from gflab.patterns import KrTreeSpec, build_kr_tree
from gflab.tree import (KeyAbsentError, RegionError, Tree, depth, rebuild_region, serve_static,
                        static_cost_from_counts, tree_depth, validate_tree)

from conftest import random_bst


def test_validate_examples(t3):
    assert validate_tree(t3)
    bad = Tree.from_links(1, {1: (2, 0), 2: (0, 0)})
    v = validate_tree(bad)
    assert not v and "order" in v.reason
    assert validate_tree(build_kr_tree(KrTreeSpec(3, 2)).tree)


def test_validate_rejects_missing_and_cycles():
    assert not validate_tree(Tree.from_links(1, {1: (0, 3), 3: (0, 0)}))  # key 2 missing
    assert validate_tree(Tree.from_links(1, {1: (0, 3), 3: (0, 0)}), require_contiguous=False)
    cyc = Tree(1, [0, 0, 0], [0, 2, 1], [0, 2, 1], (1, 2))
    assert not validate_tree(cyc)


def test_depth_examples(t3):
    assert depth(t3, 2) == 0
    assert depth(t3, 1) == 1
    kr = build_kr_tree(KrTreeSpec(3, 2)).tree
    assert depth(kr, 1) == 2
    with pytest.raises(KeyAbsentError):
        depth(t3, 9)


def test_tree_depth_examples(t3):
    assert tree_depth(t3) == 1
    assert tree_depth(build_kr_tree(KrTreeSpec(2, 1)).tree) == 2
    assert tree_depth(build_kr_tree(KrTreeSpec(4, 3)).tree) == 12


def test_serve_static_examples(t3):
    assert serve_static(t3, [1, 3, 1, 3]).total == 8
    assert serve_static(Tree.parse("1(-,3(2(-,-),-))"), [1, 3, 1, 3]).total == 6
    empty = serve_static(t3, [])
    assert empty.total == 0 and empty.restructures == 0
    with pytest.raises(KeyAbsentError):
        serve_static(t3, [1, 4])


def test_rebuild_region_examples(t3):
    same = rebuild_region(t3, [2], Tree.parse("2(-,-)"))
    assert same == t3
    out = rebuild_region(t3, [1, 2], Tree.parse("1(-,2(-,-))"))
    assert out.to_string() == "1(-,2(-,3(-,-)))"
    kr = build_kr_tree(KrTreeSpec(2, 1)).tree
    out = rebuild_region(kr, [2, 4, 3], Tree.parse("3(2(-,-),4(-,-))"))
    assert out.to_string() == "3(2(1(-,-),-),4(-,5(-,-)))"


def test_rebuild_region_errors(t3):
    with pytest.raises(RegionError):
        rebuild_region(t3, [1, 3], Tree.parse("1(-,3(-,-))"))
    with pytest.raises(RegionError):
        rebuild_region(t3, [1, 2], Tree.parse("2(-,3(-,-))"))


def test_serialization_roundtrip_and_fingerprint(t3):
    assert t3.to_string() == "2(1(-,-),3(-,-))"
    assert Tree.parse(t3.to_string()) == t3
    assert t3.fingerprint() == Tree.parse("2(1(-,-),3(-,-))").fingerprint()
    assert t3.fingerprint() != Tree.parse("1(-,2(-,3(-,-)))").fingerprint()
    assert 0 <= t3.fingerprint() < 2 ** 64


def test_long_chain_is_iterative():
    t = Tree.right_spine(50000)
    assert tree_depth(t) == 49999
    assert validate_tree(t)
    assert Tree.parse(t.to_string()) == t


def test_fraction_arithmetic():
    a, b = Fraction(1, 3), Fraction(1, 6)
    assert a + b == Fraction(1, 2) and a * b == Fraction(1, 18)
    f = Fraction(6, 8)
    assert (f.numerator, f.denominator) == (3, 4)
    assert Fraction(f.numerator, f.denominator) == f


@given(st.integers(1, 40), st.integers(0, 10 ** 6))
def test_depth_range_and_static_decomposition(n, seed):
    rng = random.Random(seed)
    t = random_bst(n, rng)
    assert validate_tree(t)
    d = t.depths()
    assert all(0 <= v <= n - 1 for v in d.values())
    x = [rng.randrange(1, n + 1) for _ in range(50)]
    counts = {k: x.count(k) for k in set(x)}
    rep = serve_static(t, x)
    assert rep.total == static_cost_from_counts(t, counts) == sum(d[q] + 1 for q in x)
    assert list(rep.per_step) == [d[q] + 1 for q in x]


@given(st.integers(1, 9), st.integers(0, 10 ** 6))
def test_rebuild_region_preserves_order(n, seed):
    rng = random.Random(seed)
    t = random_bst(n, rng)
    # grow a random connected region from a random top
    top = rng.choice(t.keys)
    region = {top}
    frontier = [c for c in t.children(top) if c]
    while frontier and rng.random() < 0.7:
        v = frontier.pop(rng.randrange(len(frontier)))
        region.add(v)
        frontier += [c for c in t.children(v) if c]
    shape = rng.choice(all_bsts(region))
    out = rebuild_region(t, region, shape)
    assert validate_tree(out)
    assert out.keys == t.keys
    assert out.inorder() == t.inorder()
    outside = set(t.keys) - region
    # nodes outside the region keep their children unless a child was in the region
    for v in outside:
        for old, new in zip(t.children(v), out.children(v)):
            if old not in region:
                assert old == new


def test_depth_array_matches_depths():
    t = build_kr_tree(KrTreeSpec(3, 2)).tree
    arr = t.depth_array()
    assert all(arr[k] == d for k, d in t.depths().items())
    assert arr[0] == -1 and isinstance(arr, np.ndarray)
