from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tractorlab.ambient import (
    RHO,
    T,
    ambient_chart,
    build_ambient,
    check_homogeneity,
    check_initial,
    check_straightness,
    check_T_form,
    classify_residuals,
    obstruction,
    rho_coeff,
    ricci_residual,
    trace_free_part,
)
from tractorlab.metrics import einstein_product, flat, random_rational, round_sphere
from tractorlab.tensorgeo import TensorJet, bach, metric_from_dict, metric_inverse, schouten


@pytest.fixture(scope="module")
def amb3():
    return build_ambient(random_rational(3, 6, seed=1), 3, target_rho_order=3)


@pytest.fixture(scope="module")
def amb4():
    return build_ambient(random_rational(4, 5, seed=1), 4)


def eq(a, b):
    o = min(a.order, b.order)
    return a.restrict(o) == b.restrict(o)


def with_component(amb, a, b, new):
    comps = amb.assembled.comps.copy()
    comps[a, b] = comps[b, a] = new
    return replace(amb, assembled=TensorJet(amb.chart, 0, 2, comps, grade=2), _cache={})


def test_flat_ambient_is_flat():
    amb = build_ambient(flat(3, 6), 3, target_rho_order=3)
    assert all(c.is_zero() for c in amb.g_rho_coeffs[1:])
    assert amb.R.is_zero()


def test_flat_even_ambient():
    amb = build_ambient(flat(4, 5), 4)
    assert all(c.is_zero() for c in amb.g_rho_coeffs[1:])
    assert amb.R.is_zero()


@pytest.mark.parametrize("g,n,M", [
    (random_rational(3, 4, seed=2), 3, 2),
    (random_rational(4, 5, seed=3), 4, 2),
    (round_sphere(3, 4), 3, 2),
    (random_rational(5, 4, seed=4, degree=2), 5, 2),
])
def test_first_coefficient_is_twice_schouten(g, n, M):
    amb = build_ambient(g, n, target_rho_order=M)
    P = schouten(g, metric_inverse(g)).P
    for i in range(n):
        for j in range(n):
            assert eq(amb.g_rho_coeffs[1].comps[i, j], P.comps[i, j].scale(2))


def test_structural_conditions(amb3, amb4):
    for amb in (amb3, amb4):
        assert check_straightness(amb)
        assert check_initial(amb)
        assert check_homogeneity(amb)
        assert check_T_form(amb)


def test_solved_coefficients_symmetric(amb3):
    assert all(c.is_symmetric() for c in amb3.g_rho_coeffs)


def test_odd_residuals_vanish(amb3):
    res = ricci_residual(amb3, 2)
    assert [r.k for r in res] == [0, 1, 2]
    for r in res:
        assert r.tangential_determined
        assert r.is_zero
    assert classify_residuals(amb3)["passed"]


def test_sphere_residuals_vanish():
    amb = build_ambient(round_sphere(3, 6), 3, target_rho_order=3)
    assert all(r.is_zero for r in ricci_residual(amb, 2))
    # conformally flat: the ambient metric is flat to the computed order
    assert amb.R.is_zero()


def test_residual_beyond_depth_raises(amb3):
    with pytest.raises(ValueError):
        ricci_residual(amb3, 3)


def test_even_residual_is_tracefree_tangential(amb4):
    info = classify_residuals(amb4)
    top = info["orders"][-1]
    assert top["k"] == 1 and top["tracefree"] and top["t_components_zero"]
    ob = obstruction(amb4)
    assert ob.is_tracefree and ob.is_tangential
    assert not ob.residual_coefficient.is_zero()


def test_obstruction_is_minus_bach(amb4):
    O = obstruction(amb4).residual_coefficient
    g = amb4.g
    B = bach(g, metric_inverse(g))
    for i in range(4):
        for j in range(4):
            assert eq(O.comps[i, j], -B.comps[i, j])
    Bw = bach(g, metric_inverse(g), sign=-1)
    assert not all(eq(O.comps[i, j], -Bw.comps[i, j]) for i in range(4) for j in range(4))


@pytest.mark.parametrize("g", [round_sphere(4, 5), einstein_product(5), flat(4, 5)])
def test_obstruction_zero_for_flat_and_einstein(g):
    ob = obstruction(build_ambient(g, 4))
    assert ob.residual_coefficient.is_zero()


def test_obstruction_requires_even_n(amb3):
    with pytest.raises(ValueError):
        obstruction(amb3)


def test_even_target_below_half_rejected():
    with pytest.raises(ValueError):
        build_ambient(flat(6, 7), 6, target_rho_order=2)


def test_insufficient_order_rejected():
    with pytest.raises(ValueError):
        build_ambient(random_rational(3, 3, seed=1), 3, target_rho_order=2)


def test_ambiguity_changes_only_top_coefficient(amb4):
    g = amb4.g
    A = metric_from_dict(g.chart, {(0, 1): {(0, 0, 0, 0): 1}, (2, 2): {(1, 0, 0, 0): Fraction(1, 2)}}, 5)
    other = build_ambient(g, 4, even_ambiguity_choice=A)
    for m in range(2):
        assert other.g_rho_coeffs[m] == amb4.g_rho_coeffs[m]
    diff = other.g_rho_coeffs[2] - amb4.g_rho_coeffs[2]
    assert not diff.is_zero()
    tf = trace_free_part(A, g, metric_inverse(g), diff.order)
    assert diff == tf
    r0, r1 = ricci_residual(amb4, 0)[0], ricci_residual(other, 0)[0]
    assert r0.comps.keys() == r1.comps.keys()
    for key in r0.comps:
        a, b = r0.comps[key], r1.comps[key]
        assert (a is None) == (b is None)
        if a is not None:
            assert a == b


def test_determinism():
    a = build_ambient(random_rational(3, 4, seed=6), 3, target_rho_order=2)
    b = build_ambient(random_rational(3, 4, seed=6), 3, target_rho_order=2)
    assert all(x == y for x, y in zip(a.g_rho_coeffs, b.g_rho_coeffs))
    assert a.assembled == b.assembled


def test_T_form_values(amb3):
    gt = amb3.assembled.comps
    assert gt[T, RHO].to_dict() == {(0,) * 4: 1}
    assert gt[T, T].to_dict() == {(1, 0, 0, 0): 2}
    assert all(gt[T, 2 + i].is_zero() for i in range(3))
    h = amb3.h()
    assert h[T][RHO] == 1 and h[T][T] == 0


# -- negative controls --------------------------------------------------------------


def test_corrupted_t_exponent_detected(amb3):
    e = amb3.t_exponents.copy()
    e[2, 3] = e[3, 2] = 1
    assert not check_homogeneity(amb3, e)
    assert check_homogeneity(amb3)


def test_perturbed_tangential_block_detected(amb3):
    c = amb3.assembled.comps[2, 2]
    bad = with_component(amb3, 2, 2, c + amb3.chart.coord(2, c.order))
    r = check_initial(bad)
    assert not r and (2, 2) in r.offending
    assert check_T_form(bad) and check_homogeneity(bad)


def test_perturbed_T_row_detected(amb3):
    c = amb3.assembled.comps[RHO, T]
    bad = with_component(amb3, RHO, T, c + amb3.chart.coord(2, c.order))
    assert not check_T_form(bad)
    assert not check_straightness(bad)


def test_rho_coeff_reads_x_jet():
    ch = ambient_chart(2)
    f = ch.coord(RHO, 4) * ch.coord(2, 4) + ch.const(3, 4)
    assert rho_coeff(f, 0).to_dict() == {(0, 0): 3}
    assert rho_coeff(f, 1).to_dict() == {(1, 0): 1}
    assert rho_coeff(f, 1).order == 2
    assert rho_coeff(f, 3) is None


@settings(max_examples=4, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([3, 4]))
def test_property_first_coefficient_and_structure(seed, n):
    g = random_rational(n, 4 if n % 2 else 5, seed=seed, degree=1)
    amb = build_ambient(g, n, target_rho_order=2 if n % 2 else None)
    P = schouten(g, metric_inverse(g)).P
    assert all(eq(amb.g_rho_coeffs[1].comps[i, j], P.comps[i, j].scale(2)) for i in range(n) for j in range(n))
    assert check_straightness(amb) and check_T_form(amb)
    assert all(r.is_zero for r in ricci_residual(amb, 0))
