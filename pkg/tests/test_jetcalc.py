from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tractorlab.jetcalc import (
    Jet,
    jet_add,
    jet_const,
    jet_eval0,
    jet_invert,
    jet_mul,
    jet_partial,
)


def J(d, nvars=2, order=2, weights=None):
    return Jet.from_dict(d, nvars, order, weights)


def test_const_examples():
    assert jet_const(1, 2, 3).to_dict() == {(0, 0): 1}
    assert jet_const(0, 3, 5).to_dict() == {}
    assert jet_const(Fraction(-7, 2), 1, 2).to_dict() == {(0,): Fraction(-7, 2)}


def test_mul_examples():
    a = J({(0,): 1, (1,): 1}, 1)
    b = J({(0,): 1, (1,): -1}, 1)
    assert jet_mul(a, b).to_dict() == {(0,): 1, (2,): -1}
    assert jet_mul(a, jet_const(0, 1, 2)).is_zero()
    c = J({(0,): 1, (1,): 1, (2,): 1}, 1)
    assert jet_mul(c, a).to_dict() == {(0,): 1, (1,): 2, (2,): 2}


def test_invert_examples():
    assert jet_invert(J({(0,): 1, (1,): 1}, 1)).to_dict() == {(0,): 1, (1,): -1, (2,): 1}
    assert jet_invert(jet_const(2, 1, 2)).to_dict() == {(0,): Fraction(1, 2)}
    inv = jet_invert(J({(0, 0): 1, (1, 0): 1, (0, 1): 1}))
    assert inv.to_dict() == {(0, 0): 1, (1, 0): -1, (0, 1): -1, (2, 0): 1, (1, 1): 2, (0, 2): 1}


def test_invert_zero_constant_raises():
    with pytest.raises(ZeroDivisionError):
        jet_invert(J({(1, 0): 1}))


def test_partial_examples():
    x2y = J({(2, 1): 1}, order=3)
    assert jet_partial(x2y, 0).to_dict() == {(1, 1): 2}
    assert jet_partial(x2y, 0).order == 2
    assert jet_partial(jet_const(5, 2, 3), 0).is_zero()
    assert jet_partial(J({(1, 0): 1, (0, 2): 3}), 1).to_dict() == {(0, 1): 6}
    assert jet_partial(jet_const(1, 2, 0), 1).order == 0
    with pytest.raises(IndexError):
        jet_partial(x2y, 2)


def test_eval0_examples():
    assert jet_eval0(J({(0,): 3, (1,): 1}, 1)) == 3
    assert jet_eval0(jet_const(0, 2, 2)) == 0
    a = J({(0,): 1, (1,): 1}, 1)
    assert jet_eval0(jet_mul(a, J({(0,): 1, (1,): -1}, 1))) == 1


def test_nvars_mismatch():
    with pytest.raises(ValueError):
        jet_add(jet_const(1, 2, 2), jet_const(1, 3, 2))
    with pytest.raises(ValueError):
        jet_mul(jet_const(1, 2, 2), jet_const(1, 1, 2))


def test_mixed_order_truncates_to_min():
    a = jet_const(1, 2, 4) + Jet.var(0, 2, 4)
    b = jet_const(1, 2, 2)
    assert (a + b).order == 2
    assert (a * b).order == 2


def test_valuation_extends_product_order():
    # x (known to order 2) times y^2 (known to order 3) is known to order 3
    x = Jet.var(0, 2, 2)
    y2 = J({(0, 2): 1}, order=3)
    assert (x * y2).order == 3
    assert (x * y2).to_dict() == {(1, 2): 1}


def test_weighted_grading():
    w = (1, 2)
    rho = Jet.var(1, 2, 4, w)
    assert rho.to_dict() == {(0, 1): 1}
    p = (jet_const(1, 2, 4, w) + rho).inverse()
    assert p.to_dict() == {(0, 0): 1, (0, 1): -1, (0, 2): 1}
    assert p.partial(1).order == 2


def test_drop_var_and_embed():
    a = J({(0, 0): 1, (1, 0): 2, (0, 1): 3, (1, 1): 4}, order=3)
    assert a.drop_var(1).to_dict() == {(0,): 1, (1,): 2}
    b = a.drop_var(1).embed(3, [2], 3)
    assert b.to_dict() == {(0, 0, 0): 1, (0, 0, 1): 2}


# -- properties ------------------------------------------------------------

small = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def jets(draw, nvars=2, order=3, nonzero_const=False):
    coeffs = {}
    for i in range(order + 1):
        for j in range(order + 1 - i):
            c = draw(small)
            if c:
                coeffs[(i, j)] = c
    if nonzero_const and not coeffs.get((0, 0)):
        coeffs[(0, 0)] = Fraction(1)
    return Jet.from_dict(coeffs, nvars, order)


@settings(max_examples=40, deadline=None)
@given(jets(), jets(), jets())
def test_ring_axioms(a, b, c):
    assert (a * b).same(b * a)
    assert ((a * b) * c) == (a * (b * c))
    assert (a * (b + c)) == (a * b + a * c)
    assert (a + b).same(b + a)


@settings(max_examples=40, deadline=None)
@given(jets(nonzero_const=True))
def test_inverse_property(a):
    assert (a * a.inverse()).same(jet_const(1, 2, a.order))


@settings(max_examples=40, deadline=None)
@given(jets(order=4))
def test_partials_commute(a):
    assert a.partial(0).partial(1).same(a.partial(1).partial(0))


@settings(max_examples=40, deadline=None)
@given(jets(order=4), jets(order=4, nonzero_const=True))
def test_truncation_consistency(a, b):
    lo_a, lo_b = a.restrict(2), b.restrict(2)
    assert (a * b).restrict(2).same(lo_a * lo_b)
    assert b.inverse().restrict(2).same(lo_b.inverse())
    assert a.partial(0).restrict(1).same(lo_a.partial(0))
