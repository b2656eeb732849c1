from __future__ import annotations

from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from fgl_forge.ringcore import (
    CoefElem,
    Ideal,
    IllegalReductionError,
    Kind,
    RingSpec,
    is_unit,
    p_valuation,
    parse_coef,
    reduce_coef,
)
from oracles import coef_to_sympy

BP = RingSpec(Kind.BP, 2, 2)
K4 = RingSpec(Kind.KPR, 2, 2, r=2)
E2 = RingSpec(Kind.EN, 3, 2, degree_cutoff=16)


def elements(spec: RingSpec, max_terms=3, laurent_range=(-2, 2)):
    k = len(spec.gens)
    lo, hi = laurent_range
    exps = st.tuples(*[st.integers(0, 3) for _ in range(k - 1)],
                     st.integers(lo, hi) if spec.laurent else st.integers(0, 3))
    if spec.modulus is not None:
        coefs = st.integers(0, spec.modulus - 1)
    else:
        coefs = st.fractions(max_denominator=5).filter(lambda f: f.denominator % spec.p)
    return st.dictionaries(exps, coefs, max_size=max_terms).map(lambda d: CoefElem(spec, d))


@settings(max_examples=60, deadline=None)
@given(elements(BP), elements(BP), elements(BP))
def test_bp_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == BP.zero()
    assert a * BP.one() == a


@settings(max_examples=60, deadline=None)
@given(elements(BP), elements(BP))
def test_bp_product_matches_sympy(a, b):
    assert sp.expand(coef_to_sympy(a * b) - coef_to_sympy(a) * coef_to_sympy(b)) == 0


@settings(max_examples=60, deadline=None)
@given(elements(K4), elements(K4), elements(K4))
def test_kpr_ring_axioms(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert all(0 <= v < 4 for v in (a * b).terms.values())


@settings(max_examples=60, deadline=None)
@given(elements(K4))
def test_kpr_inverse_of_units(a):
    if is_unit(a):
        assert a * a.inverse() == K4.one()
    else:
        with pytest.raises(ArithmeticError):
            a.inverse()


@settings(max_examples=40, deadline=None)
@given(elements(BP), elements(BP))
def test_reduction_is_a_ring_map(a, b):
    target = RingSpec(Kind.KPR, 2, 2, r=2)
    ints = [x for x in (a, b) if all(Fraction(c).denominator % 2 for c in x.terms.values())]
    for x in ints:
        for y in ints:
            assert reduce_coef(x * y, target) == reduce_coef(x, target) * reduce_coef(y, target)
            assert reduce_coef(x + y, target) == reduce_coef(x, target) + reduce_coef(y, target)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([BP, K4, E2]).flatmap(elements))
def test_text_round_trip(a):
    assert parse_coef(a.spec, a.to_text()) == a


def test_reduction_kills_lower_generators():
    c = BP.monomial({1: 2}) + BP.monomial({2: 1}, 3)
    assert reduce_coef(c, RingSpec(Kind.KPR, 2, 2, r=2)).to_text() == "3*v2"
    assert reduce_coef(c, RingSpec(Kind.KPR, 2, 1, r=1)).to_text() == "v1^2"


def test_reduction_rejects_denominators_divisible_by_p():
    rat = RingSpec(Kind.RATIONAL, 2, 1)
    with pytest.raises((IllegalReductionError, ArithmeticError, ValueError)):
        reduce_coef(rat.const(Fraction(1, 2)), RingSpec(Kind.KPR, 2, 1))


def test_units_in_en_are_local():
    e = RingSpec(Kind.EN, 2, 2, degree_cutoff=12)
    u = e.gen(2) + e.gen(1, 3)
    assert is_unit(u)
    assert u * u.inverse() == e.one()
    assert not is_unit(e.gen(1))
    assert e.gen(1).in_ideal(Ideal("m0"))
    assert e.const(2).in_ideal(Ideal.parse("I1"))


def test_en_inverse_needs_cutoff():
    e = RingSpec(Kind.EN, 2, 2)
    with pytest.raises(ArithmeticError):
        (e.gen(2) + e.gen(1, 3)).inverse(max_steps=50)


def test_generator_degrees():
    assert RingSpec(Kind.BP, 3, 2).generator_degrees == (-4, -16)
    assert K4.gens == (2,)


@pytest.mark.parametrize("kw", [dict(kind=Kind.BP, p=4, n=1), dict(kind=Kind.BP, p=2, n=1, r=2),
                                dict(kind=Kind.KPR, p=2, n=0)])
def test_bad_specs(kw):
    with pytest.raises(ValueError):
        RingSpec(**kw)


def test_p_valuation():
    assert p_valuation(24, 2) == 3
    assert p_valuation(Fraction(9, 4), 3) == 2
    assert Ideal.parse("I_3") == Ideal("I", 3)
    with pytest.raises(ValueError):
        Ideal.parse("J2")
