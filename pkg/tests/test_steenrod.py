import random

import pytest

from bgx.errors import SchemaViolation
from bgx.steenrod import (
    AlgebraSpec,
    action_words,
    admissible_words,
    bg_excess,
    binom2,
    conjugation_sum,
    milnor_basis,
    milnor_degree,
    milnor_product,
    milnor_str,
    milnor_to_composite,
    parse_milnor,
    product_sets,
    subalgebra_basis,
)

from oracles import adem_word_nf, admissible_count, comb_odd, word_product


def test_basis_small_degrees():
    assert milnor_basis(0) == ((),)
    assert milnor_basis(2) == ((2,),)
    assert milnor_basis(3) == ((3,), (0, 1))
    assert milnor_basis(-1) == ()


def test_basis_counts_match_admissible_words():
    for d in range(21):
        assert len(milnor_basis(d)) == admissible_count(d)
        assert len(admissible_words(d)) == admissible_count(d)


def test_product_unit():
    for p in milnor_basis(5):
        assert milnor_product((), p) == frozenset([p])
        assert milnor_product(p, ()) == frozenset([p])


def test_product_adem_examples():
    assert milnor_product((1,), (1,)) == frozenset()
    assert milnor_product((1,), (2,)) == frozenset([(3,)])


def test_product_associative_random():
    rng = random.Random(3)
    elts = [p for d in range(1, 8) for p in milnor_basis(d)]
    for _ in range(250):
        a, b, c = (rng.choice(elts) for _ in range(3))
        if milnor_degree(a) + milnor_degree(b) + milnor_degree(c) > 12:
            continue
        lhs = product_sets(milnor_product(a, b), frozenset([c]))
        rhs = product_sets(frozenset([a]), milnor_product(b, c))
        assert lhs == rhs


def test_product_against_word_algebra():
    # multiply in the admissible-word picture and compare
    for da in range(1, 7):
        for a in milnor_basis(da):
            wa = milnor_to_composite(a)
            for db in range(1, 7):
                if da + db > 9:
                    continue
                for b in milnor_basis(db):
                    wb = milnor_to_composite(b)
                    words = word_product(frozenset(wa), frozenset(wb))
                    expect = set()
                    for term in milnor_product(a, b):
                        expect ^= milnor_to_composite(term)
                    assert words == frozenset(expect), (a, b)


def test_conjugation_values():
    assert conjugation_sum(1).terms == frozenset([(1,)])
    assert conjugation_sum(2).terms == frozenset([(2,)])
    assert conjugation_sum(3).terms == frozenset([(3,), (0, 1)])


def test_conjugation_recursion():
    for j in range(1, 21):
        acc = set()
        for i in range(j + 1):
            acc ^= product_sets(
                frozenset([(i,) if i else ()]), conjugation_sum(j - i).terms
            )
        assert not acc, j


def test_bg_excess():
    assert bg_excess(()) == 0
    assert bg_excess((1,)) == 2
    assert bg_excess((0, 1)) == 4
    # relation to the additive excess
    for d in range(10):
        for p in milnor_basis(d):
            assert bg_excess(p) == milnor_degree(p) + sum(p)


def test_composite_examples():
    assert milnor_to_composite((3,)) == frozenset([(3,)])
    assert milnor_to_composite((0, 1)) == frozenset([(3,), (2, 1)])
    assert milnor_to_composite((1, 1)) == frozenset([(3, 1)])


def test_composite_reconstructs():
    for d in range(11):
        for p in milnor_basis(d):
            acc = set()
            for word in milnor_to_composite(p):
                term = frozenset([()])
                for a in word:
                    term = product_sets(term, frozenset([(a,)]))
                acc ^= term
            assert acc == {p}


def test_composite_words_admissible():
    for d in range(11):
        for p in milnor_basis(d):
            for w in milnor_to_composite(p):
                assert adem_word_nf(w) == frozenset([w])


def test_binom2_negative_top():
    assert all(binom2(-1, i) == 1 for i in range(10))
    assert binom2(-2, 1) == 0 and binom2(-2, 2) == 1
    assert binom2(3, -1) == 0
    for m in range(0, 12):
        for i in range(0, 12):
            assert binom2(m, i) == (1 if comb_odd(m, i) else 0)


def test_subalgebra_bases():
    assert subalgebra_basis(AlgebraSpec.exterior(0), 1) == ((1,),)
    assert subalgebra_basis(AlgebraSpec.exterior(1), 4) == ((1, 1),)
    assert subalgebra_basis(AlgebraSpec.a1(), 5) == ((2, 1),)


def test_subalgebra_closed_under_product():
    for spec in (AlgebraSpec.exterior(0), AlgebraSpec.exterior(1), AlgebraSpec.a1()):
        top = spec.top_degree()
        elts = [p for d in range(top + 1) for p in subalgebra_basis(spec, d)]
        for a in elts:
            for b in elts:
                for term in milnor_product(a, b):
                    assert spec.contains(term), (spec.name, a, b, term)


def test_action_words_expand_back():
    for spec in (AlgebraSpec.exterior(1), AlgebraSpec.a1(), AlgebraSpec.full()):
        top = spec.top_degree() or 8
        for d in range(min(top, 8) + 1):
            for p in subalgebra_basis(spec, d):
                acc = set()
                for word in action_words(spec, p):
                    term = frozenset([()])
                    for g in word:
                        term = product_sets(term, frozenset([g]))
                    acc ^= term
                assert acc == {p}, (spec.name, p)


def test_render_and_parse():
    assert milnor_str((2, 1)) == "Sq(2,1)"
    assert parse_milnor("Sq(2,1)") == (2, 1)
    assert parse_milnor("Sq()") == ()
    assert parse_milnor("Sq(3,0)") == (3,)
    with pytest.raises(SchemaViolation):
        parse_milnor("Sq[1]")
    with pytest.raises(SchemaViolation):
        parse_milnor("Sq(-1)")
