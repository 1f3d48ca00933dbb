import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gflab.patterns import (KrMode, KrTreeSpec, ParameterDomainError, PatternError,
                            RecurrenceParams, build_chain_tree, build_kr_tree, closed_form,
                            fib_gf_cost, fib_promotion, iterate_recurrence, kr_size,
                            kr_size_closed, kr_structure, predicted_gap,
                            predicted_gf_cost_strong, predicted_promotion_scheme,
                            predicted_promotion_strong, promote_chain, promote_kr,
                            promotion_main_term, strong_alpha, strong_beta)
from gflab.stable import atomic_length, generate, leaf_profiles, validate_stability
from gflab.gf import gf_serve
from gflab.tree import depth, serve_static, tree_depth, validate_tree


def test_closed_form_examples():
    p = RecurrenceParams(Fraction(1), Fraction(2, 3), Fraction(2))
    assert closed_form(p, 0) == 1
    assert closed_form(p, 1) == Fraction(8, 3)
    for r in range(12):
        a = Fraction(2, 3) ** r
        assert closed_form(p, r) == 6 * (1 - a) + a


def test_closed_form_domain():
    with pytest.raises(ParameterDomainError):
        closed_form(RecurrenceParams(Fraction(0), Fraction(1, 2), Fraction(1), Fraction(1)), 3)
    with pytest.raises(ParameterDomainError):
        closed_form(RecurrenceParams(Fraction(0), Fraction(1), Fraction(1)), 3)
    # alpha = 1/2 is fine without the gamma term
    p = RecurrenceParams(Fraction(3), Fraction(1, 2), Fraction(1))
    assert closed_form(p, 5) == iterate_recurrence(p, 5)


rationals = st.fractions(min_value=-3, max_value=3, max_denominator=12)


@given(rationals, rationals, rationals, rationals, st.integers(0, 30))
def test_closed_form_matches_iteration(b0, alpha, beta, gamma, r):
    if alpha in (Fraction(1, 2), Fraction(1)):
        alpha += Fraction(1, 7)
    p = RecurrenceParams(b0, alpha, beta, gamma)
    assert closed_form(p, r) == iterate_recurrence(p, r)


def test_kr_tree_examples():
    t = build_kr_tree(KrTreeSpec(2, 1)).tree
    assert t.to_string() == "2(1(-,-),4(3(-,-),5(-,-)))"
    assert build_kr_tree(KrTreeSpec(3, 2)).tree.n == 25
    assert build_kr_tree(KrTreeSpec(5, 0)).tree.n == 1
    with pytest.raises(PatternError):
        KrTreeSpec(3, 2, KrMode.WEAK_TRUNK_ROOTS)
    with pytest.raises(PatternError):
        KrTreeSpec(1, 2)


def test_spec_json_roundtrip():
    s = KrTreeSpec(2, 3, "WeakTrunkRoots")
    assert KrTreeSpec.from_json(s.to_json()) == s


@pytest.mark.parametrize("k", [2, 3, 4, 5])
@pytest.mark.parametrize("r", [0, 1, 2, 3, 4])
def test_kr_tree_invariants(k, r):
    st_ = build_kr_tree(KrTreeSpec(k, r))
    t = st_.tree
    assert validate_tree(t) and validate_stability(st_)
    assert t.n == kr_size(k, r) == kr_size_closed(k, r)
    assert tree_depth(t) == k * r
    assert depth(t, 1) == r
    assert kr_structure(t)[:2] == ((k, r) if r else (2, 0))


def test_kr_structure_rejects_other_trees():
    with pytest.raises(PatternError):
        kr_structure(build_chain_tree(3).tree, 2)
    with pytest.raises(PatternError):
        promote_kr(build_chain_tree(4))
    with pytest.raises(PatternError):
        promote_chain(build_kr_tree(KrTreeSpec(3, 1)))


def test_weak_trunk_roots_is_weak_five_at_r1():
    st_ = build_kr_tree(KrTreeSpec(2, 1, KrMode.WEAK_TRUNK_ROOTS))
    assert st_.to_string() == "2!WR(1(-,-),4!S_R(3(-,-),5(-,-)))"
    st3 = build_kr_tree(KrTreeSpec(2, 3, KrMode.WEAK_TRUNK_ROOTS))
    assert validate_stability(st3) and st3.kind() == "weak"


def test_chain_tree_examples():
    assert build_chain_tree(1).tree.to_string() == "2(1(-,-),3(-,-))"
    assert build_chain_tree(2).tree.to_string() == "2(1(-,-),4(3(-,-),5(-,-)))"
    freqs = {p.leaf: p.frequency for p in leaf_profiles(build_chain_tree(5))}
    for i in range(1, 6):
        assert freqs[2 * i - 1] == Fraction(1, 2 ** i)
    assert freqs[11] == freqs[9]


def test_chain_promotion():
    for n in range(1, 8):
        st_ = build_chain_tree(n)
        new, rep = promote_chain(st_)
        assert validate_tree(new) and new.keys == st_.tree.keys
        assert rep.average == 1 - Fraction(1, 2 ** n)
        deepest = max(p.old_depth for p in rep.per_leaf)
        lifted = [p for p in rep.per_leaf if p.new_depth == p.old_depth - 1]
        assert len(lifted) == len(rep.per_leaf) - 1
        assert [p.old_depth for p in rep.per_leaf if p not in lifted] == [deepest]


def test_promotion_k2_r1():
    st_ = build_kr_tree(KrTreeSpec(2, 1))
    new, rep = promote_kr(st_)
    assert rep.average == Fraction(3, 4)
    assert new.to_string() == "3(1(-,2(-,-)),5(4(-,-),-))"
    x = generate(st_, atomic_length(st_))
    assert Fraction(serve_static(new, x).total, len(x)) == Fraction(7, 4)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
@pytest.mark.parametrize("r", range(0, 7))
def test_promotion_structure(k, r):
    st_ = build_kr_tree(KrTreeSpec(k, r))
    new, rep = promote_kr(st_)
    assert validate_tree(new) and new.keys == st_.tree.keys
    assert rep.average == sum(p.frequency * (p.old_depth - p.new_depth) for p in rep.per_leaf)
    assert all(p.new_depth <= p.old_depth for p in rep.per_leaf)
    assert {p.leaf for p in rep.per_leaf} == set(st_.tree.leaves())
    assert rep.average == predicted_promotion_scheme(k, r)


def test_spliced_minimum_placement():
    # m_i = min(B_i) rises to depth i-1 below the level root
    for k in (3, 4, 5):
        for r in (1, 2, 3):
            st_ = build_kr_tree(KrTreeSpec(k, r))
            _, _, top = kr_structure(st_.tree)
            new, _ = promote_kr(st_)
            assert new.root == top.leaf
            for i in range(2, k):
                keys = set(st_.tree.subtree_keys(top.b[i].root))
                m = min(keys)
                assert depth(new, m) == i - 1 and m in st_.tree.leaves()
                rest = new.right[m]
                below = set(new.subtree_keys(rest)) if rest else set()
                later = set(top.trunk[1:i])
                for j in range(2, i):
                    later |= set(st_.tree.subtree_keys(top.b[j].root))
                # rest of B_i plus only demoted trunk nodes and blocks to its right
                assert keys - {m} <= below <= (keys - {m}) | later


def test_predicted_gf_cost_examples():
    assert predicted_gf_cost_strong(2, 0) == 1
    assert predicted_gf_cost_strong(2, 1) == Fraction(5, 2)
    for r in range(10):
        a = Fraction(3, 4) ** r
        assert predicted_gf_cost_strong(2, r) == 7 * (1 - a) + a
    for k in range(2, 12):
        assert strong_beta(k) == 2 - Fraction(1, 2 ** k)
        assert Fraction(7, 4) <= strong_beta(k) < 2


def test_predicted_promotion_examples():
    for r in range(10):
        assert predicted_promotion_strong(2, r) == 3 * (1 - Fraction(3, 4) ** r)
    for k in range(2, 7):
        assert predicted_promotion_strong(k, 0) == 0
    assert predicted_promotion_strong(3, 1) == Fraction(5, 8)


def test_lemma_delta_bounds():
    for k in range(3, 9):
        for r in range(0, 30):
            delta = predicted_promotion_strong(k, r) - promotion_main_term(k, r)
            assert 0 <= delta < strong_alpha(k) ** r or r == 0 and delta == 0


def test_scheme_and_lemma_agree_only_at_k2():
    for r in range(1, 8):
        assert predicted_promotion_scheme(2, r) == predicted_promotion_strong(2, r)
        assert predicted_promotion_scheme(3, r) > predicted_promotion_strong(3, r)
    # measured promotion at (3, 1): leaf lifted 3, its sibling block 1, B_2 leaf 1
    _, rep = promote_kr(build_kr_tree(KrTreeSpec(3, 1)))
    assert rep.average == Fraction(3, 4)


def test_predicted_gap_examples():
    for k in range(2, 6):
        assert predicted_gap(k, 0) == 0
    for r in range(8):
        assert predicted_gap(2, r) == 3 * (1 - Fraction(3, 4) ** r)
    g = predicted_gap(3, 8, exact=False)
    assert abs(float(g) - 2.6255) < 1e-3
    assert predicted_gap(3, 8) > g
    assert predicted_gap(2, 3, "Mixed") == 2 * (1 - Fraction(8, 9) ** 3)
    with pytest.raises(ValueError):
        predicted_gap(2, 3, "Other")


@pytest.mark.parametrize("r", range(1, 7))
def test_weak_pair_values(r):
    st_ = build_kr_tree(KrTreeSpec(2, r, KrMode.WEAK_TRUNK_ROOTS))
    a = atomic_length(st_)
    rep, _, _ = gf_serve(st_.tree, generate(st_, a))
    alpha = Fraction(2, 3) ** r
    assert Fraction(rep.total, a) == 6 * (1 - alpha) + alpha == fib_gf_cost(r)
    _, pr = promote_kr(st_)
    assert pr.average == 3 * (1 - alpha) == fib_promotion(r)
    assert fib_gf_cost(r) - fib_promotion(r) < 3


def test_random_rational_grid_seeded():
    rng = random.Random(7)
    for _ in range(200):
        vals = [Fraction(rng.randrange(-50, 51), rng.randrange(1, 20)) for _ in range(4)]
        if vals[1] in (Fraction(1, 2), Fraction(1)):
            continue
        p = RecurrenceParams(*vals)
        r = rng.randrange(0, 31)
        assert closed_form(p, r) == iterate_recurrence(p, r)
