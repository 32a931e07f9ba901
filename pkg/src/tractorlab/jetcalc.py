"""Truncated multivariate power series ("jets") with exact rational coefficients.

A :class:`Jet` is a Taylor polynomial at the origin, stored as a list of
graded parts ``parts[d]`` where part ``d`` collects the monomials of
(weighted) degree ``d``.  Every variable carries a positive integer weight;
with all weights equal to one the grading is the usual total degree.

Truncation rules
----------------
* ``a + b`` is known to ``min(order(a), order(b))``.
* ``a * b`` is known to ``min(order(a) + val(b), order(b) + val(a))`` capped
  at ``max(order(a), order(b))``, where ``val`` is the lowest degree carrying a
  nonzero coefficient.  When both factors have a nonzero constant term this is
  the plain ``min`` rule.
* ``d/dx_i`` lowers the order by the weight of ``x_i`` (never below 0).

Coefficients live in ``flint.fmpq_mpoly`` polynomials; arithmetic is exact.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import flint

__all__ = [
    "Jet",
    "MultiIndex",
    "jet_const",
    "jet_add",
    "jet_mul",
    "jet_invert",
    "jet_partial",
    "jet_eval0",
    "to_fmpq",
    "to_fraction",
    "mul_order",
    "jet_dot",
]

MultiIndex = tuple  # tuple[int, ...] of nonnegative exponents


@lru_cache(maxsize=None)
def _context(nvars: int):
    return flint.fmpq_mpoly_ctx.get(("x", nvars), "deglex")


def to_fmpq(c) -> flint.fmpq:
    if isinstance(c, flint.fmpq):
        return c
    if isinstance(c, int):
        return flint.fmpq(c)
    if isinstance(c, Fraction):
        return flint.fmpq(c.numerator, c.denominator)
    if isinstance(c, str):
        f = Fraction(c)
        return flint.fmpq(f.numerator, f.denominator)
    if isinstance(c, flint.fmpz):
        return flint.fmpq(c)
    raise TypeError(f"not an exact rational: {c!r}")


def to_fraction(c) -> Fraction:
    c = to_fmpq(c)
    return Fraction(int(c.p), int(c.q))


def _wdeg(exps: Sequence[int], weights: Sequence[int]) -> int:
    return sum(e * w for e, w in zip(exps, weights))


class Jet:
    """Immutable truncated power series in ``nvars`` variables.

    Parameters are normally not passed directly; use :meth:`const`,
    :meth:`var`, :meth:`from_dict` or arithmetic on existing jets.
    """

    __slots__ = ("nvars", "order", "weights", "parts", "_val")

    def __init__(self, nvars: int, order: int, parts: Sequence, weights: Sequence[int] | None = None):
        if order < 0:
            raise ValueError("jet order must be nonnegative")
        self.nvars = nvars
        self.order = order
        self.weights = tuple(weights) if weights is not None else (1,) * nvars
        if len(self.weights) != nvars:
            raise ValueError("one weight per variable required")
        ctx = _context(nvars)
        parts = list(parts)[: order + 1]
        while len(parts) < order + 1:
            parts.append(ctx.from_dict({}))
        self.parts = tuple(parts)
        self._val = None

    # -- construction -------------------------------------------------
    @classmethod
    def zero(cls, nvars: int, order: int, weights=None) -> "Jet":
        return cls(nvars, order, (), weights)

    @classmethod
    def const(cls, c, nvars: int, order: int, weights=None) -> "Jet":
        ctx = _context(nvars)
        return cls(nvars, order, (ctx.constant(to_fmpq(c)),), weights)

    @classmethod
    def var(cls, i: int, nvars: int, order: int, weights=None) -> "Jet":
        exps = [0] * nvars
        exps[i] = 1
        return cls.from_dict({tuple(exps): 1}, nvars, order, weights)

    @classmethod
    def from_dict(cls, coeffs: Mapping[MultiIndex, object], nvars: int, order: int, weights=None) -> "Jet":
        """Build a jet from ``{exponents: rational}``; terms beyond ``order`` are dropped."""
        w = tuple(weights) if weights is not None else (1,) * nvars
        graded: list[dict] = [dict() for _ in range(order + 1)]
        for exps, c in coeffs.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or min(exps, default=0) < 0:
                raise ValueError(f"bad multi-index {exps} for {nvars} variables")
            d = _wdeg(exps, w)
            if d <= order:
                q = to_fmpq(c)
                if q != 0:
                    graded[d][exps] = graded[d].get(exps, flint.fmpq(0)) + q
        ctx = _context(nvars)
        return cls(nvars, order, [ctx.from_dict(g) for g in graded], w)

    @classmethod
    def from_poly(cls, poly, nvars: int, order: int, weights=None) -> "Jet":
        return cls.from_dict(poly.to_dict(), nvars, order, weights)

    # -- inspection ---------------------------------------------------
    def to_dict(self) -> dict[MultiIndex, Fraction]:
        out = {}
        for p in self.parts:
            for exps, c in p.to_dict().items():
                out[tuple(exps)] = to_fraction(c)
        return out

    def coeff(self, exps: MultiIndex) -> Fraction:
        d = _wdeg(exps, self.weights)
        if d > self.order:
            raise ValueError(f"monomial {exps} beyond truncation order {self.order}")
        return to_fraction(self.parts[d].to_dict().get(tuple(exps), 0))

    def eval0(self) -> Fraction:
        return to_fraction(self.const_term())

    def const_term(self) -> flint.fmpq:
        p0 = self.parts[0]
        return p0.coeffs()[0] if not p0.is_zero() else flint.fmpq(0)

    def valuation(self) -> int:
        if self._val is None:
            v = self.order + 1
            for d, p in enumerate(self.parts):
                if not p.is_zero():
                    v = d
                    break
            self._val = v
        return self._val

    def is_zero(self) -> bool:
        return self.valuation() > self.order

    def nterms(self) -> int:
        return sum(len(p) for p in self.parts)

    # -- structural ops -----------------------------------------------
    def first_var_coeff(self, k: int) -> "Jet | None":
        """Coefficient of ``v_0^k`` as a jet in the remaining variables, or ``None`` past the order."""
        w0 = self.weights[0]
        o = self.order - w0 * k
        if o < 0:
            return None
        ctx = _context(self.nvars - 1)
        parts = [ctx.from_dict({tuple(e[1:]): c for e, c in self.parts[d + w0 * k].terms() if e[0] == k})
                 for d in range(o + 1)]
        return Jet(self.nvars - 1, o, parts, self.weights[1:])

    def restrict(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise the truncation order of a jet")
        return Jet(self.nvars, order, self.parts[: order + 1], self.weights)

    def _check(self, other: "Jet") -> None:
        if self.nvars != other.nvars:
            raise ValueError(f"variable-count mismatch: {self.nvars} vs {other.nvars}")
        if self.weights != other.weights:
            raise ValueError("jets carry different variable weights")

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            self._check(other)
            return other
        return Jet.const(other, self.nvars, self.order, self.weights)

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other) -> "Jet":
        other = self._coerce(other)
        o = min(self.order, other.order)
        return Jet(self.nvars, o, [self.parts[d] + other.parts[d] for d in range(o + 1)], self.weights)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(self.nvars, self.order, [-p for p in self.parts], self.weights)

    def __sub__(self, other) -> "Jet":
        other = self._coerce(other)
        o = min(self.order, other.order)
        return Jet(self.nvars, o, [self.parts[d] - other.parts[d] for d in range(o + 1)], self.weights)

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def scale(self, c) -> "Jet":
        q = to_fmpq(c)
        if q == 0:
            return Jet.zero(self.nvars, self.order, self.weights)
        return Jet(self.nvars, self.order, [p * q for p in self.parts], self.weights)

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self.scale(other)
        self._check(other)
        va, vb = self.valuation(), other.valuation()
        o = min(self.order + vb, other.order + va, max(self.order, other.order))
        ctx = _context(self.nvars)
        out = [ctx.from_dict({}) for _ in range(o + 1)]
        pa, pb = self.parts, other.parts
        for i in range(va, min(self.order, o - vb) + 1):
            a = pa[i]
            if a.is_zero():
                continue
            for j in range(vb, min(other.order, o - i) + 1):
                b = pb[j]
                if not b.is_zero():
                    out[i + j] += a * b
        return Jet(self.nvars, o, out, self.weights)

    def __rmul__(self, other) -> "Jet":
        return self.scale(other)

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * other.inverse()
        q = to_fmpq(other)
        return self.scale(1 / q)

    def inverse(self) -> "Jet":
        c0 = self.const_term()
        if c0 == 0:
            raise ZeroDivisionError("jet with zero constant term is not invertible")
        inv0 = 1 / c0
        ctx = _context(self.nvars)
        out = [ctx.constant(inv0)]
        for d in range(1, self.order + 1):
            acc = ctx.from_dict({})
            for i in range(1, d + 1):
                a = self.parts[i]
                if not a.is_zero() and not out[d - i].is_zero():
                    acc += a * out[d - i]
            out.append(acc * (-inv0))
        return Jet(self.nvars, self.order, out, self.weights)

    def partial(self, i: int) -> "Jet":
        if not 0 <= i < self.nvars:
            raise IndexError(f"variable index {i} out of range for {self.nvars} variables")
        w = self.weights[i]
        o = max(self.order - w, 0)
        ctx = _context(self.nvars)
        out = [ctx.from_dict({}) for _ in range(o + 1)]
        for d in range(w, min(self.order, o + w) + 1):
            p = self.parts[d]
            if not p.is_zero():
                out[d - w] = p.derivative(i)
        return Jet(self.nvars, o, out, self.weights)

    def drop_var(self, i: int) -> "Jet":
        """Restrict to the hyperplane ``x_i = 0``; the result has one variable fewer."""
        keep = [k for k in range(self.nvars) if k != i]
        coeffs = {tuple(e[k] for k in keep): c for e, c in self.to_dict().items() if e[i] == 0}
        return Jet.from_dict(coeffs, self.nvars - 1, self.order, [self.weights[k] for k in keep])

    def embed(self, nvars: int, var_map: Sequence[int], order: int, weights=None) -> "Jet":
        """Re-express in a larger variable set, sending variable ``k`` to ``var_map[k]``.

        Raises if the target grading asks for monomials this jet does not know.
        """
        w = tuple(weights) if weights is not None else (1,) * nvars
        coeffs = {}
        for exps, c in self.to_dict().items():
            new = [0] * nvars
            for k, e in enumerate(exps):
                new[var_map[k]] += e
            coeffs[tuple(new)] = c
        self._check_known(w, order, var_map, nvars)
        return Jet.from_dict(coeffs, nvars, order, w)

    def regrade(self, weights: Sequence[int], order: int) -> "Jet":
        """Same variables, new grading; every requested monomial must be known here."""
        self._check_known(tuple(weights), order, list(range(self.nvars)), self.nvars)
        return Jet.from_dict(self.to_dict(), self.nvars, order, weights)

    def _check_known(self, new_w, new_order, var_map, nvars) -> None:
        # a monomial of new degree <= new_order must have old degree <= self.order
        for k, v in enumerate(var_map):
            if new_order // new_w[v] * self.weights[k] > self.order:
                raise ValueError(
                    f"jet known to order {self.order} cannot supply order {new_order} in the new grading"
                )

    # -- comparison / display -----------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Jet):
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        if self.nvars != other.nvars or self.weights != other.weights:
            return False
        o = min(self.order, other.order)
        return all(self.parts[d] == other.parts[d] for d in range(o + 1))

    def same(self, other: "Jet") -> bool:
        """Equality including truncation order."""
        return self.order == other.order and self == other

    __hash__ = None

    def __repr__(self) -> str:
        body = " + ".join(str(p) for p in self.parts if not p.is_zero()) or "0"
        return f"Jet({body} + O({self.order + 1}))"


def mul_order(a: Jet, b: Jet) -> int:
    """Truncation order of ``a * b`` (see module docstring)."""
    return min(a.order + b.valuation(), b.order + a.valuation(), max(a.order, b.order))


def jet_dot(pairs: Iterable[tuple[Jet, Jet]], nvars: int, weights=None, extra: Iterable[Jet] = ()) -> Jet:
    """``sum a_i * b_i + sum extra``; zero products are skipped but still bound the order."""
    order = None
    acc = None
    for a, b in pairs:
        o = mul_order(a, b)
        order = o if order is None else min(order, o)
        if a.is_zero() or b.is_zero():
            continue
        p = a * b
        acc = p if acc is None else acc + p
    for e in extra:
        order = e.order if order is None else min(order, e.order)
        acc = e if acc is None else acc + e
    if order is None:
        raise ValueError("empty sum has no truncation order")
    if acc is None:
        return Jet.zero(nvars, order, weights)
    return acc.restrict(order) if acc.order > order else acc


def jet_const(c, nvars: int, order: int, weights=None) -> Jet:
    return Jet.const(c, nvars, order, weights)


def jet_add(a: Jet, b: Jet) -> Jet:
    return a + b


def jet_mul(a: Jet, b: Jet) -> Jet:
    return a * b


def jet_invert(a: Jet) -> Jet:
    return a.inverse()


def jet_partial(a: Jet, var: int) -> Jet:
    return a.partial(var)


def jet_eval0(a: Jet) -> Fraction:
    return a.eval0()


def poly_jet(terms: Iterable[tuple[object, MultiIndex]], nvars: int, order: int, weights=None) -> Jet:
    """Convenience: ``poly_jet([(c, exps), ...])`` sums coefficient/monomial pairs."""
    d: dict = {}
    for c, e in terms:
        d[tuple(e)] = to_fraction(d.get(tuple(e), 0)) + to_fraction(c)
    return Jet.from_dict(d, nvars, order, weights)
