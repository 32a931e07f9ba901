"""Built-in metric jets at the origin of an ``x``-chart."""

from __future__ import annotations

import random
from fractions import Fraction
from math import factorial

import numpy as np

from .jetcalc import Jet
from .tensorgeo import Chart, TensorJet

__all__ = ["x_chart", "builtin_metric", "cos2_series", "BUILTINS"]

BUILTINS = ("flat", "round_sphere", "einstein_product_s2xs2", "random_rational")


def x_chart(n: int) -> Chart:
    return Chart([f"x{i + 1}" for i in range(n)])


def cos2_series(order: int) -> dict[int, Fraction]:
    """Taylor coefficients of ``cos(x)^2 = (1 + cos 2x)/2``."""
    out = {0: Fraction(1)}
    for k in range(1, order // 2 + 1):
        out[2 * k] = Fraction((-1) ** k * 2 ** (2 * k - 1), factorial(2 * k))
    return out


def _diag_metric(chart: Chart, diag: list[dict], order: int) -> TensorJet:
    n = chart.dim
    comps = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            comps[i, j] = Jet.from_dict(diag[i], n, order) if i == j else chart.zero(order)
    return TensorJet(chart, 0, 2, comps)


def _warped(n: int, factors: list[list[int]], order: int) -> list[dict]:
    """Diagonal entries ``prod_{k in factors[i]} cos^2(x_k)``."""
    c2 = cos2_series(order)
    diag = []
    for i in range(n):
        term = {(0,) * n: Fraction(1)}
        for k in factors[i]:
            new = {}
            for e, c in term.items():
                for p, a in c2.items():
                    if sum(e) + p > order:
                        continue
                    f = list(e)
                    f[k] += p
                    f = tuple(f)
                    new[f] = new.get(f, 0) + c * a
            term = new
        diag.append(term)
    return diag


def flat(n: int, order: int, signature: tuple[int, int] | None = None) -> TensorJet:
    p = n if signature is None else signature[0]
    ch = x_chart(n)
    return _diag_metric(ch, [{(0,) * n: 1 if i < p else -1} for i in range(n)], order)


def round_sphere(n: int, order: int) -> TensorJet:
    """Unit ``S^n`` in iterated polar coordinates centred on a point of the equator.

    ``g = dx1^2 + cos^2 x1 (dx2^2 + cos^2 x2 (dx3^2 + ...))``
    """
    return _diag_metric(x_chart(n), _warped(n, [list(range(i)) for i in range(n)], order), order)


def einstein_product(order: int) -> TensorJet:
    """Product of two unit 2-spheres, each in the polar chart above."""
    return _diag_metric(x_chart(4), _warped(4, [[], [0], [], [2]], order), order)


def random_rational(n: int, order: int, seed: int, magnitude: int = 3, degree: int = 2,
                    signature: tuple[int, int] | None = None) -> TensorJet:
    """``diag(±1)`` plus symmetric polynomial perturbations of degree ``1..degree``.

    Coefficients are ``a/b`` with ``|a| <= magnitude`` and ``1 <= b <= magnitude``.
    """
    rng = random.Random(seed)
    p = n if signature is None else signature[0]
    monos = [e for e in _monomials(n, degree) if sum(e) >= 1]
    ch = x_chart(n)
    comps = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            d = {}
            if i == j:
                d[(0,) * n] = Fraction(1 if i < p else -1)
            for e in monos:
                a = rng.randint(-magnitude, magnitude)
                b = rng.randint(1, magnitude)
                if a:
                    d[e] = Fraction(a, b)
            comps[i, j] = comps[j, i] = Jet.from_dict(d, n, order)
    return TensorJet(ch, 0, 2, comps)


def _monomials(n: int, degree: int):
    def rec(k, left):
        if k == n - 1:
            for e in range(left + 1):
                yield (e,)
            return
        for e in range(left + 1):
            for rest in rec(k + 1, left - e):
                yield (e,) + rest

    return sorted(rec(0, degree), key=lambda e: (sum(e), tuple(-x for x in e)))


def builtin_metric(name: str, n: int, params: dict | None, x_jet_order: int,
                   signature: tuple[int, int] | None = None) -> TensorJet:
    params = dict(params or {})
    if name == "flat":
        return flat(n, x_jet_order, signature)
    if name == "round_sphere":
        _riemannian(name, n, signature)
        return round_sphere(n, x_jet_order)
    if name in ("einstein_product_s2xs2", "einstein_product"):
        if n != 4:
            raise ValueError(f"{name} requires n=4, got n={n}")
        _riemannian(name, n, signature)
        return einstein_product(x_jet_order)
    if name == "random_rational":
        if "seed" not in params:
            raise ValueError("random_rational needs a seed")
        return random_rational(n, x_jet_order, int(params["seed"]), int(params.get("magnitude", 3)),
                               int(params.get("degree", 2)), signature)
    raise ValueError(f"unknown builtin metric {name!r}; expected one of {', '.join(BUILTINS)}")


def _riemannian(name: str, n: int, signature) -> None:
    if signature is not None and tuple(signature) != (n, 0):
        raise ValueError(f"{name} is Riemannian; signature must be ({n}, 0)")
