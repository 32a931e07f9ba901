import random
from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tractorlab.jetcalc import Jet
from tractorlab.metrics import flat, random_rational, round_sphere, x_chart
from tractorlab.tensorgeo import (
    Chart,
    OrderExhausted,
    TensorJet,
    bach,
    christoffel,
    covariant_derivative,
    lower_first,
    metric_from_dict,
    metric_inverse,
    ricci,
    riemann,
    scalar_curvature,
    schouten,
)


def curvature(g):
    ginv = metric_inverse(g)
    G = christoffel(g, ginv)
    return ginv, G, riemann(G)


def eq(a: Jet, b: Jet) -> bool:
    o = min(a.order, b.order)
    return a.restrict(o) == b.restrict(o)


def is_delta(t: TensorJet) -> bool:
    n = t.chart.dim
    return all((t.comps[i, j] - (1 if i == j else 0)).is_zero() for i in range(n) for j in range(n))


def test_chart_names_distinct():
    with pytest.raises(ValueError):
        Chart(["x", "x"])


def test_inverse_identity():
    ginv = metric_inverse(flat(3, 4))
    assert is_delta(ginv)


def test_inverse_diagonal_series():
    ch = x_chart(2)
    g = metric_from_dict(ch, {(0, 0): {(0, 0): 1, (1, 0): 1}, (1, 1): {(0, 0): 1}}, 4)
    ginv = metric_inverse(g)
    assert ginv.comps[0, 0].to_dict() == {(k, 0): (-1) ** k for k in range(5)}
    assert ginv.comps[1, 1].to_dict() == {(0, 0): 1}


def test_inverse_contracts_to_delta():
    g = random_rational(3, 4, seed=7)
    ginv = metric_inverse(g)
    prod = TensorJet.build(g.chart, 1, 1, lambda ix: sum((ginv.comps[ix[0], k] * g.comps[k, ix[1]] for k in range(3)),
                                                         g.chart.zero(4)))
    assert is_delta(prod)


def test_inverse_degenerate_raises():
    ch = x_chart(2)
    g = metric_from_dict(ch, {(0, 0): {(1, 0): 1}, (1, 1): {(0, 0): 1}}, 3)
    with pytest.raises(ValueError, match="degenerate"):
        metric_inverse(g)


def test_christoffel_flat_zero():
    g = flat(3, 3)
    G = christoffel(g, metric_inverse(g))
    assert G.is_zero()


def test_christoffel_conformal_exponential():
    # g = e^{2x} (dx^2 + dy^2): Gamma^1_11 = 1, Gamma^1_22 = -1, Gamma^2_12 = 1 (hand evaluation)
    e2x = {(k, 0): Fraction(2 ** k, factorial(k)) for k in range(6)}
    g = metric_from_dict(x_chart(2), {(0, 0): e2x, (1, 1): e2x}, 5)
    G = christoffel(g, metric_inverse(g))
    assert G.comps[0, 0, 0].eval0() == 1
    assert G.comps[0, 1, 1].eval0() == -1
    assert G.comps[1, 0, 1].eval0() == 1
    assert G.comps[1, 1, 0].eval0() == 1
    # the metric is conformally flat with a linear log-factor: Gamma is constant
    assert G.comps[0, 0, 0].to_dict() == {(0, 0): 1}


def test_metricity():
    g = random_rational(3, 4, seed=3)
    ginv, G, _ = curvature(g)
    assert covariant_derivative(g, G).is_zero()


def test_order_exhausted():
    g = flat(2, 0)
    with pytest.raises(OrderExhausted):
        g.chart.d(g.comps[0, 0], 0)


def test_gauss_curvature_two_sphere():
    g = round_sphere(2, 6)
    ginv, G, R = curvature(g)
    Rdown = lower_first(g, R)
    det = g.comps[0, 0] * g.comps[1, 1] - g.comps[0, 1] * g.comps[1, 0]
    K = Rdown.comps[0, 1, 0, 1] / det
    assert K.to_dict() == {(0, 0): 1}


def test_flat_riemann_zero():
    _, _, R = curvature(flat(4, 3))
    assert R.is_zero()


def first_bianchi_ok(R) -> bool:
    n = R.chart.dim
    for l in range(n):
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    s = R.comps[l, k, i, j] + R.comps[l, i, j, k] + R.comps[l, j, k, i]
                    if not s.is_zero():
                        return False
    return True


def test_riemann_symmetries():
    g = random_rational(3, 4, seed=11)
    _, _, R = curvature(g)
    Rd = lower_first(g, R)
    n = 3
    assert first_bianchi_ok(R)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    x = Rd.comps[a, b, c, d]
                    assert eq(x, -Rd.comps[a, b, d, c])
                    assert eq(x, -Rd.comps[b, a, c, d])
                    assert eq(x, Rd.comps[c, d, a, b])


def test_second_bianchi():
    g = random_rational(3, 4, seed=5)
    _, G, R = curvature(g)
    dR = covariant_derivative(R, G)  # dR[l, k, i, j, a] = nabla_a R^l_kij
    n = 3
    for l in range(n):
        for k in range(n):
            for a in range(n):
                for b in range(n):
                    for c in range(n):
                        s = dR.comps[l, k, b, c, a] + dR.comps[l, k, c, a, b] + dR.comps[l, k, a, b, c]
                        assert s.is_zero()


def test_ricci_three_sphere():
    g = round_sphere(3, 6)
    _, _, R = curvature(g)
    Ric = ricci(R)
    for i in range(3):
        for j in range(3):
            assert eq(Ric.comps[i, j], g.comps[i, j].scale(2))
    assert Ric.is_symmetric()


def test_ricci_symmetric_random():
    _, _, R = curvature(random_rational(4, 3, seed=2))
    assert ricci(R).is_symmetric()


def test_gradient_of_scalar():
    ch = x_chart(2)
    f = Jet.from_dict({(2, 1): 3, (0, 1): 1}, 2, 4)
    comps = np.empty((), dtype=object)
    comps[()] = f
    g = flat(2, 4)
    df = covariant_derivative(TensorJet(ch, 0, 0, comps), christoffel(g, metric_inverse(g)))
    assert df.comps[0] == f.partial(0) and df.comps[1] == f.partial(1)


def _random_field(chart, up, down, seed, order):
    rng = random.Random(seed)
    n = chart.dim

    def comp(_):
        d = {}
        for e in [(0,) * n] + [tuple(int(i == j) for i in range(n)) for j in range(n)]:
            d[e] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        d[tuple(2 if i == 0 else 0 for i in range(n))] = Fraction(rng.randint(-3, 3))
        return Jet.from_dict(d, n, order)

    return TensorJet.build(chart, up, down, comp)


def test_ricci_identity_vector():
    g = random_rational(3, 4, seed=9)
    _, G, R = curvature(g)
    V = _random_field(g.chart, 1, 0, 1, 4)
    ddV = covariant_derivative(covariant_derivative(V, G), G)  # ddV[l, j, i] = nabla_i nabla_j V^l
    n = 3
    for l in range(n):
        for i in range(n):
            for j in range(n):
                lhs = ddV.comps[l, j, i] - ddV.comps[l, i, j]
                rhs = sum((R.comps[l, k, i, j] * V.comps[k] for k in range(n)), g.chart.zero(4))
                assert eq(lhs, rhs)


def test_ricci_identity_mixed_tensor():
    g = random_rational(3, 4, seed=4)
    _, G, R = curvature(g)
    Tt = _random_field(g.chart, 1, 1, 2, 4)
    dd = covariant_derivative(covariant_derivative(Tt, G), G)  # dd[a, b, j, i] = nabla_i nabla_j T^a_b
    n = 3
    z = g.chart.zero(4)
    for a in range(n):
        for b in range(n):
            for i in range(n):
                for j in range(n):
                    lhs = dd.comps[a, b, j, i] - dd.comps[a, b, i, j]
                    rhs = sum((R.comps[a, k, i, j] * Tt.comps[k, b] - R.comps[k, b, i, j] * Tt.comps[a, k]
                               for k in range(n)), z)
                    assert eq(lhs, rhs)


def test_schouten_flat_and_sphere():
    g = flat(3, 3)
    sd = schouten(g, metric_inverse(g))
    assert sd.P.is_zero() and sd.J.is_zero()
    for n in (3, 4):
        g = round_sphere(n, 5)
        sd = schouten(g, metric_inverse(g))
        assert eq(sd.J, Jet.const(Fraction(n, 2), n, 5))
        for i in range(n):
            for j in range(n):
                assert eq(sd.P.comps[i, j], g.comps[i, j].scale(Fraction(1, 2)))


def test_schouten_identities():
    g = random_rational(4, 3, seed=13)
    ginv, _, R = curvature(g)
    Ric = ricci(R)
    sd = schouten(g, ginv, Ric)
    assert eq(scalar_curvature(ginv, sd.P), sd.J)
    for i in range(4):
        for j in range(4):
            assert eq(sd.P.comps[i, j].scale(2), Ric.comps[i, j] - sd.J * g.comps[i, j])


def test_schouten_low_dimension_raises():
    g = flat(2, 2)
    with pytest.raises(ValueError):
        schouten(g, metric_inverse(g))


def test_bach_divergence_free_n4():
    g = random_rational(4, 6, seed=1, degree=2)
    ginv, G, _ = curvature(g)
    B = bach(g, ginv)
    assert B.is_symmetric()
    dB = covariant_derivative(B, G)
    for j in range(4):
        div = sum((ginv.comps[i, k] * dB.comps[i, j, k] for i in range(4) for k in range(4)), g.chart.zero(6))
        assert div.is_zero(), div.order
    # the opposite curvature-term sign is not divergence free
    Bw = bach(g, ginv, sign=-1)
    dBw = covariant_derivative(Bw, G)
    div = sum((ginv.comps[i, k] * dBw.comps[i, 0, k] for i in range(4) for k in range(4)), g.chart.zero(6))
    assert not div.is_zero()


def test_bach_vanishes_on_conformally_flat():
    g = round_sphere(4, 5)
    assert bach(g, metric_inverse(g)).is_zero()


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 3))
def test_property_metricity_and_bianchi(seed, order):
    g = random_rational(3, order + 1, seed=seed)
    _, G, R = curvature(g)
    assert covariant_derivative(g, G).is_zero()
    assert first_bianchi_ok(R)
    assert ricci(R).is_symmetric()
