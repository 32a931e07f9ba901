import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tractorlab.ambient import RHO, T, build_ambient
from tractorlab.exactla import rank
from tractorlab.holonomy import ambient_holonomy, span_accumulate
from tractorlab.jetcalc import Jet
from tractorlab.metrics import einstein_product, flat, random_rational, round_sphere
from tractorlab.tensorgeo import OrderExhausted
from tractorlab.tractor import (
    TractorJet,
    connection_agreement,
    curvature_commutator_check,
    density_extension,
    einstein_tractor,
    gp_curvature_identity_check,
    invariant_lift,
    metric_compatibility,
    parallel_tractor_detect,
    splitting_sections,
    tractor_connection_ambient,
    tractor_connection_scale,
    tractor_D_ambient,
    tractor_D_scale,
    tractor_fiber,
    tractor_metric,
)


@pytest.fixture(scope="module")
def amb3():
    return build_ambient(random_rational(3, 4, seed=1), 3, target_rho_order=2)


@pytest.fixture(scope="module")
def flat3():
    return build_ambient(flat(3, 4), 3, target_rho_order=2)


def rjet(rng, n, order):
    """Random quadratic polynomial, known to ``order``."""
    units = [tuple(int(i == j) for i in range(n)) for j in range(n)]
    d = {(0,) * n: Fraction(rng.randint(-3, 3), rng.randint(1, 3))}
    for e in units:
        d[e] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    for a in units:
        for b in units:
            d[tuple(x + y for x, y in zip(a, b))] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    return Jet.from_dict(d, n, order)


def rtractor(seed, n, order, weight=0):
    rng = random.Random(seed)
    return TractorJet([rjet(rng, n, order) for _ in range(n + 2)], weight)


def agree(a, b):
    o = min(a.order, b.order)
    return a.restrict(o) == b.restrict(o)


# -- fibre, lifts, metric ----------------------------------------------------------


def test_fiber(amb3):
    F = tractor_fiber(amb3)
    assert F.dim == 5 and F.distinguished == T
    assert all(gr == -1 for gr in F.grades)
    # vectors tangent to G: everything except the rho direction
    assert len(F.tangent_to_G) == 4
    assert all(v[RHO] == 0 for v in F.tangent_to_G)


def test_invariant_lift():
    L = invariant_lift([1, 0, 0], 3, 3)
    assert [c.eval0() for c in L.comps] == [0, 0, 1, 0, 0]
    assert L.grade == 0
    with pytest.raises(ValueError):
        invariant_lift([1, 0], 3, 3)


def test_lift_ambiguity_along_T_is_invisible_at_weight_zero(amb3):
    U = rtractor(1, 3, 3)
    a = tractor_connection_ambient(amb3, [0, 5, 1, 0, 0], U)
    b = tractor_connection_ambient(amb3, [1, 0, 0], U)
    assert a == b
    # at weight w the T component contributes w * U
    Uw = rtractor(1, 3, 3, weight=2)
    a = tractor_connection_ambient(amb3, [0, 1, 1, 0, 0], Uw)
    b = tractor_connection_ambient(amb3, [1, 0, 0], Uw)
    assert (a - b) == Uw.restrict(a.order).scale(2)


def test_connection_rejects_transverse_direction(amb3):
    with pytest.raises(ValueError):
        tractor_connection_ambient(amb3, [1, 0, 1, 0, 0], rtractor(0, 3, 3))


def test_tractor_metric_signature(amb3):
    m = tractor_metric(amb3)
    assert m.is_symmetric() and m.signature == (4, 1)
    lor = build_ambient(flat(3, 4, signature=(2, 1)), 3, signature=(2, 1), target_rho_order=2)
    assert tractor_metric(lor).signature == (3, 2)


# -- connection --------------------------------------------------------------------


def test_leibniz(amb3):
    rng = random.Random(4)
    U = rtractor(2, 3, 3)
    f = rjet(rng, 3, 3)
    eta = [1, 0, 0]
    lhs = tractor_connection_ambient(amb3, eta, U.mul(f))
    rhs = U.mul(f.partial(0)) + tractor_connection_ambient(amb3, eta, U).mul(f)
    assert all(agree(a, b) for a, b in zip(lhs.components, rhs.components))


def test_metric_compatibility(amb3):
    U, V = rtractor(5, 3, 3), rtractor(6, 3, 3)
    assert metric_compatibility(amb3, [1, 2, 0], U, V)
    rng = random.Random(1)
    assert metric_compatibility(amb3, [rjet(rng, 3, 3), 0, Fraction(1, 3)], U, V)


def test_curvature_commutator(amb3):
    assert curvature_commutator_check(amb3, rtractor(7, 3, 3))


def test_connection_agreement_generic(amb3):
    assert connection_agreement(amb3)


def test_scale_connection_flat_examples():
    g = flat(3, 3)
    one = Jet.const(1, 3, 3)
    zero = Jet.zero(3, 3)
    # sigma = 1: d sigma - mu_a = 0, tau enters mu
    s, mu, t = tractor_connection_scale(g, [1, 0, 0], (one, [zero] * 3, one))
    assert s.is_zero() and t.is_zero()
    assert [m.eval0() for m in mu] == [1, 0, 0]
    # sigma = x1^2 / 2, mu = x1 e_1: parallel part vanishes in sigma
    x1 = Jet.from_dict({(1, 0, 0): 1}, 3, 3)
    s, mu, t = tractor_connection_scale(g, [1, 0, 0], (x1 * x1 * Fraction(1, 2), [x1, zero, zero], zero))
    assert s.is_zero() and mu[0] == one and t.is_zero()


def test_scale_connection_matches_ambient(amb3):
    U = rtractor(8, 3, 3)
    for eta in ([1, 0, 0], [0, Fraction(2, 3), -1]):
        s, mu, t = tractor_connection_scale(amb3.g, eta, U.triple())
        amb = tractor_connection_ambient(amb3, eta, U)
        sa, mua, ta = amb.triple()
        assert agree(s, sa) and agree(t, ta) and all(agree(a, b) for a, b in zip(mu, mua))


@pytest.mark.parametrize("g", [round_sphere(3, 4), einstein_product(4)])
def test_einstein_scale_is_parallel(g):
    n = g.chart.dim
    v = einstein_tractor(g)
    o = g.order - 1
    sigma = Jet.const(v[RHO], n, o)
    tau = Jet.const(v[T], n, o)
    mu = [Jet.zero(n, o)] * n
    for a in range(n):
        eta = [int(b == a) for b in range(n)]
        s, m, t = tractor_connection_scale(g, eta, (sigma, mu, tau))
        assert s.is_zero() and t.is_zero() and all(x.is_zero() for x in m)


def test_einstein_tractor_values():
    assert einstein_tractor(round_sphere(3, 3)) == [1, Fraction(-1, 2), 0, 0, 0]
    assert einstein_tractor(einstein_product(3)) == [1, Fraction(-1, 6), 0, 0, 0, 0]


# -- splitting and D ---------------------------------------------------------------


def test_splitting(amb3):
    S = splitting_sections(amb3)
    assert S.X.at_z() == [1, 0, 0, 0, 0]
    assert S.Y.at_z() == [0, 1, 0, 0, 0]
    h = amb3.h()
    # X = h(T, .) is null; Y pairs with X to 1
    assert h[T][T] == 0 and h[RHO][T] == 1 and h[RHO][RHO] == 0
    rows = [S.X.at_z(), S.Y.at_z()] + [z.at_z() for z in S.Z]
    assert rank(rows) == 5
    rng = random.Random(3)
    phi, r = rjet(rng, 3, 3), rjet(rng, 3, 3)
    psi = [rjet(rng, 3, 3) for _ in range(3)]
    p2, psi2, r2 = S.decompose(S.compose(phi, psi, r))
    assert agree(p2, phi) and agree(r2, r) and all(agree(a, b) for a, b in zip(psi, psi2))


def test_D_flat_examples():
    g = flat(3, 4)
    one = Jet.const(1, 3, 4)
    assert tractor_D_scale(one, 0, g).is_zero()
    x1 = Jet.from_dict({(1, 0, 0): 1}, 3, 4)
    D = tractor_D_scale(x1, 1, g)
    assert D.weight == 0 and D.kind == "covector"
    assert D.components[RHO].is_zero()
    assert D.components[T] == x1.scale(3)
    assert [c.eval0() for c in D.components[2:]] == [3, 0, 0]


@pytest.mark.parametrize("w", [0, 1, -1, Fraction(1, 2), Fraction(-1, 2)])
def test_D_ambient_matches_scale(amb3, w):
    rng = random.Random(11)
    v = rjet(rng, 3, 4)
    Ds = tractor_D_scale(v, w, amb3.g)
    Va = density_extension(v, w, 3, 4, [rjet(rng, 3, 2), rjet(rng, 3, 0)])
    Vb = density_extension(v, w, 3, 4)
    Da, Db = tractor_D_ambient(amb3, Va, w), tractor_D_ambient(amb3, Vb, w)
    assert all(agree(a, b) for a, b in zip(Da.components, Db.components))
    assert all(agree(a, b) for a, b in zip(Da.components, Ds.components))


def test_D_grade_mismatch_raises(amb3):
    v = Jet.const(1, 3, 4)
    with pytest.raises(ValueError):
        tractor_D_ambient(amb3, density_extension(v, 1, 3, 4), 0)


def test_density_extension_order_guard():
    v = Jet.const(1, 3, 2)
    with pytest.raises(ValueError):
        density_extension(v, 0, 3, 4)


# -- curvature identity ----------------------------------------------------------


def test_gp_identity(flat3, amb3):
    assert gp_curvature_identity_check(flat3)
    assert gp_curvature_identity_check(amb3)


def test_gp_identity_excludes_n4():
    amb = build_ambient(flat(4, 5), 4)
    with pytest.raises(ValueError):
        gp_curvature_identity_check(amb)


def test_gp_identity_negative_control(amb3):
    other = random_rational(3, 4, seed=2)
    r = gp_curvature_identity_check(amb3, g=other)
    assert not r and r.offending


def test_along_G_needs_rho_zero_data():
    amb = build_ambient(flat(3, 4), 3, target_rho_order=2)
    U = TractorJet([Jet.const(1, 3, 0)] * 5)
    with pytest.raises(OrderExhausted):
        tractor_connection_ambient(amb, [1, 0, 0], U)


# -- parallel tractors -------------------------------------------------------------


def test_parallel_tractor_flat(flat3):
    found = parallel_tractor_detect(span_accumulate([], size=5), flat3.h())
    assert len(found) == 5


def test_parallel_tractor_generic_none():
    amb = build_ambient(random_rational(3, 6, seed=1), 3, target_rho_order=3)
    span = ambient_holonomy(amb, 3)
    assert span.budget_exhausted_at is None
    assert parallel_tractor_detect(span, amb.h()) == []


def test_parallel_tractor_einstein():
    amb = build_ambient(einstein_product(5), 4)
    found = parallel_tractor_detect(ambient_holonomy(amb, 3), amb.h())
    assert len(found) == 1
    v, norm = found[0]
    I = einstein_tractor(amb.g)
    assert all(v[i] * I[RHO] == I[i] * v[RHO] for i in range(6))
    assert norm == v[RHO] ** 2 * Fraction(-1, 3)


_amb_cache = {}


def generic3():
    if "a" not in _amb_cache:
        _amb_cache["a"] = build_ambient(random_rational(3, 4, seed=1), 3, target_rho_order=2)
    return _amb_cache["a"]


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6), st.lists(st.builds(Fraction, st.integers(-9, 9), st.integers(1, 4)),
                                          min_size=3, max_size=3))
def test_property_scale_and_ambient_connections_agree(seed, eta):
    amb = generic3()
    U = rtractor(seed, 3, 3)
    s, mu, t = tractor_connection_scale(amb.g, eta, U.triple())
    sa, mua, ta = tractor_connection_ambient(amb, eta, U).triple()
    assert agree(s, sa) and agree(t, ta) and all(agree(a, b) for a, b in zip(mu, mua))
    assert metric_compatibility(amb, eta, U, rtractor(seed + 1, 3, 3))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([0, 1, 2, -1, Fraction(1, 2), Fraction(3, 2)]))
def test_property_D_forms_agree(seed, w):
    amb = generic3()
    rng = random.Random(seed)
    v = rjet(rng, 3, 4)
    Da = tractor_D_ambient(amb, density_extension(v, w, 3, 4, [rjet(rng, 3, 2)]), w)
    Ds = tractor_D_scale(v, w, amb.g)
    assert all(agree(a, b) for a, b in zip(Da.components, Ds.components))
