import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gflab.bounds import (NotALeafError, ResourceError, STATIC_OPT_MAX_N, entropy_bits,
                          static_opt, static_opt_naive, wilber1, wilber1_naive)
from gflab.gf import gf_serve
from gflab.opt import all_bsts
from gflab.sequences import Segmented
from gflab.stable import atomic_length, strong_seven, weak_five, generate, random_stability_tree
from gflab.tree import serve_static, static_cost_from_counts, validate_tree

from conftest import random_bst


def test_wilber_examples(t3):
    w = wilber1([1, 3] * 4, t3)
    assert w.alt_per_inner_node == {2: 7} and w.bound == Fraction(23, 2)
    w = wilber1([1, 1, 1, 1], t3)
    assert w.alt_per_inner_node[2] == 0 and w.bound == 4
    with pytest.raises(NotALeafError):
        wilber1([1, 2], t3)
    with pytest.raises(NotALeafError):
        wilber1_naive([2], t3)


def test_wilber_fully_alternating_on_strong_tree():
    st_ = strong_seven()
    x = generate(st_, atomic_length(st_)).tolist()
    w = wilber1(x, st_.tree)
    for u, alt in w.alt_per_inner_node.items():
        visits = sum(1 for q in x if q in set(st_.tree.subtree_keys(u)))
        assert alt == visits - 1


def test_wilber_segmented_matches_naive():
    t = weak_five().tree
    seq = Segmented.of([1, 1, 5], ([5, 3, 1], 300), ([3, 5], 7), [1])
    assert wilber1(seq, t) == wilber1_naive(seq.to_array().tolist(), t)


@given(st.integers(0, 10 ** 9))
def test_wilber_kernel_matches_naive(seed):
    rng = random.Random(seed)
    st_ = random_stability_tree(31, rng, random_phase=True)
    leaves = st_.tree.leaves()
    x = [rng.choice(leaves) for _ in range(rng.randrange(0, 40))]
    reps = rng.randrange(0, 5)
    seq = Segmented.of(x[:3], (x[3:], reps), x[:1])
    got, want = wilber1(seq, st_.tree), wilber1_naive(seq.to_array().tolist(), st_.tree)
    assert got == want
    for u, alt in got.alt_per_inner_node.items():
        visits = sum(1 for q in seq if q in set(st_.tree.subtree_keys(u)))
        assert 0 <= alt <= max(visits - 1, 0)


def test_static_opt_examples():
    r = static_opt({1: 2, 3: 2}, 3)
    assert r.cost == 6 and validate_tree(r.tree)
    assert serve_static(r.tree, [1, 3, 1, 3]).total == 6
    assert static_opt({1: 1}, 1).cost == 1
    x = [5, 3, 1]
    r = static_opt({k: 1 for k in x}, 5)
    assert Fraction(r.cost, 3) <= Fraction(5, 3)
    with pytest.raises(ValueError):
        static_opt({4: 1}, 3)
    with pytest.raises(ValueError):
        static_opt({1: -1}, 3)
    with pytest.raises(ResourceError):
        static_opt({1: 1}, STATIC_OPT_MAX_N + 1)


def test_static_opt_accepts_count_arrays():
    counts = np.array([0, 4, 0, 1, 7], dtype=np.int64)
    assert static_opt(counts, 4).cost == static_opt({1: 4, 3: 1, 4: 7}, 4).cost


@pytest.mark.parametrize("n", range(1, 9))
def test_static_opt_matches_enumeration(n):
    rng = random.Random(n)
    shapes = all_bsts(list(range(1, n + 1)))
    for _ in range(10):
        counts = {k: rng.randrange(0, 6) for k in range(1, n + 1)}
        best = min(static_cost_from_counts(t, counts) for t in shapes)
        r = static_opt(counts, n)
        assert r.cost == best == static_opt_naive(counts, n)
        assert static_cost_from_counts(r.tree, counts) == best


def test_static_opt_enumeration_n10():
    rng = random.Random(10)
    shapes = all_bsts(list(range(1, 11)))
    assert len(shapes) == 16796
    counts = {k: rng.randrange(0, 9) for k in range(1, 11)}
    assert static_opt(counts, 10).cost == min(static_cost_from_counts(t, counts) for t in shapes)


@given(st.integers(1, 60), st.integers(0, 10 ** 9))
def test_static_opt_matches_naive_dp(n, seed):
    rng = random.Random(seed)
    counts = {k: rng.randrange(0, 20) for k in range(1, n + 1) if rng.random() < 0.7}
    r = static_opt(counts, n)
    assert r.cost == static_opt_naive(counts, n)
    assert r.cost <= static_cost_from_counts(random_bst(n, rng), counts)


def test_entropy_examples():
    assert entropy_bits([Fraction(1, 2)] * 2) == 1.0
    assert entropy_bits([Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)]) == 1.5
    assert entropy_bits([Fraction(1)]) == 0.0
    assert math.isclose(entropy_bits([Fraction(1, 3)] * 3), math.log2(3))
    with pytest.raises(ValueError):
        entropy_bits([Fraction(0), Fraction(1)])
    with pytest.raises(ValueError):
        entropy_bits([Fraction(1, 2)])


@given(st.integers(0, 10 ** 9), st.sampled_from([0.0, 1 / 3, 1.0]))
def test_wilber_below_gf_and_static(seed, weak_prob):
    rng = random.Random(seed)
    st_ = random_stability_tree(63, rng, weak_prob=weak_prob, random_phase=True)
    x = generate(st_, 2 * atomic_length(st_))
    m, n = len(x), st_.tree.n
    w = wilber1(x, st_.tree).bound
    g = gf_serve(st_.tree, x)[0].total
    assert w <= g
    assert w <= serve_static(random_bst(n, rng), x).total
    counts = np.bincount(x, minlength=n + 1)
    assert w <= static_opt(counts, n).cost
    ratio = Fraction(g) / w
    assert ratio <= (2 if st_.kind() == "strong" else Fraction(5, 2))
    alpha = Fraction(1) if st_.kind() == "strong" else Fraction(4, 5)
    assert w / m >= alpha / 2 * Fraction(g, m) + Fraction(1, 2) - Fraction(n - 1, 4 * m)
