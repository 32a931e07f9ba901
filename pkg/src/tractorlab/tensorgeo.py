"""Coordinate tensor calculus with jet-valued components.

Conventions
-----------
* ``Gamma[l, j, k]`` is ``Γ^l_{jk}`` with ``∇_j ∂_k = Γ^l_{jk} ∂_l``.
* ``R[l, k, i, j]`` is ``R^l_{kij}`` where
  ``R(∂_i, ∂_j)∂_k = ∇_i∇_j∂_k − ∇_j∇_i∂_k = R^l_{kij} ∂_l``.
* ``Ric_{kj} = R^i_{kij}``; the unit sphere has ``Ric = (n−1)g``.
* Schouten ``P = (Ric − J g)/(n−2)`` with ``J = Scal/(2(n−1))``.

Dilation coordinate
-------------------
A chart may declare one coordinate ``t`` on which every tensor depends
homogeneously: a tensor of grade ``w`` has components ``t^p f`` with
``p = w + #(upper indices equal to t) − #(lower indices equal to t)`` and
``f`` independent of ``t``.  Only ``f`` (the value on the slice ``t = 1``)
is stored, so ``t`` is not a jet variable and ``∂_t`` acts as
multiplication by ``p``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .jetcalc import Jet, jet_dot, mul_order, to_fmpq

__all__ = [
    "OrderExhausted",
    "Chart",
    "TensorJet",
    "SchoutenData",
    "metric_inverse",
    "christoffel",
    "riemann",
    "ricci",
    "ricci_from_christoffel",
    "scalar_curvature",
    "covariant_derivative",
    "schouten",
    "lower_first",
    "weyl",
    "cotton",
    "bach",
    "jet_matrix_inverse",
    "raise_both",
]


class OrderExhausted(ValueError):
    """A derivative was requested from a jet that does not know enough terms."""


class Chart:
    """Coordinate chart; ``weights`` grade the jet variables (``None`` for the dilation coordinate)."""

    def __init__(self, names: Sequence[str], weights: Sequence[int] | None = None, dilation: int | None = None):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("coordinate names must be distinct")
        self.names = names
        self.dim = len(names)
        self.dilation = dilation
        w = list(weights) if weights is not None else [1] * self.dim
        self._var = []
        jw = []
        for k in range(self.dim):
            if k == dilation:
                self._var.append(None)
            else:
                self._var.append(len(jw))
                jw.append(int(w[k]))
        self.jet_weights = tuple(jw)
        self.nvars = len(jw)

    def __repr__(self) -> str:
        return f"Chart({','.join(self.names)})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Chart)
            and self.names == other.names
            and self.jet_weights == other.jet_weights
            and self.dilation == other.dilation
        )

    def __hash__(self) -> int:
        return hash((self.names, self.jet_weights, self.dilation))

    def var(self, k: int) -> int | None:
        return self._var[k]

    def const(self, c, order: int) -> Jet:
        return Jet.const(c, self.nvars, order, self.jet_weights)

    def zero(self, order: int) -> Jet:
        return Jet.zero(self.nvars, order, self.jet_weights)

    def coord(self, k: int, order: int) -> Jet:
        v = self._var[k]
        if v is None:
            raise ValueError("the dilation coordinate is not a jet variable")
        return Jet.var(v, self.nvars, order, self.jet_weights)

    def d(self, f: Jet, k: int, p: int = 0) -> Jet:
        """``∂_k`` of the component ``t^p f`` (returned as a slice value)."""
        v = self._var[k]
        if v is None:
            return f.scale(p) if p else self.zero(f.order)
        if f.order < self.jet_weights[v]:
            raise OrderExhausted(
                f"d/d{self.names[k]} needs order {self.jet_weights[v]}, jet known to order {f.order}"
            )
        return f.partial(v)


def _tpow(chart: Chart, grade: int, nup: int, idx: Sequence[int]) -> int:
    t = chart.dilation
    if t is None:
        return 0
    return grade + sum(1 for a in idx[:nup] if a == t) - sum(1 for a in idx[nup:] if a == t)


def jsum(terms: Iterable[Jet], zero: Jet) -> Jet:
    acc = None
    for x in terms:
        acc = x if acc is None else acc + x
    return zero if acc is None else acc


class TensorJet:
    """Dense array of jets with ``up`` upper indices followed by ``down`` lower indices."""

    __slots__ = ("chart", "up", "down", "comps", "grade")

    def __init__(self, chart: Chart, up: int, down: int, comps: np.ndarray, grade: int = 0):
        if comps.shape != (chart.dim,) * (up + down):
            raise ValueError(f"component array shape {comps.shape} does not match valence ({up},{down})")
        self.chart = chart
        self.up = up
        self.down = down
        self.comps = comps
        self.grade = grade

    @classmethod
    def build(cls, chart: Chart, up: int, down: int, fn: Callable[[tuple], Jet], grade: int = 0,
              symmetric: tuple[int, int] | None = None) -> "TensorJet":
        """Fill components from ``fn(index)``; with ``symmetric=(a, b)`` only sorted pairs are computed."""
        r = up + down
        comps = np.empty((chart.dim,) * r, dtype=object)
        for idx in itertools.product(range(chart.dim), repeat=r):
            if symmetric is not None:
                a, b = symmetric
                if idx[a] > idx[b]:
                    continue
            comps[idx] = fn(idx)
        if symmetric is not None:
            a, b = symmetric
            for idx in itertools.product(range(chart.dim), repeat=r):
                if idx[a] > idx[b]:
                    j = list(idx)
                    j[a], j[b] = j[b], j[a]
                    comps[idx] = comps[tuple(j)]
        return cls(chart, up, down, comps, grade)

    def __getitem__(self, idx) -> Jet:
        return self.comps[idx]

    @property
    def rank(self) -> int:
        return self.up + self.down

    @property
    def order(self) -> int:
        return min(c.order for c in self.comps.flat)

    def indices(self):
        return itertools.product(range(self.chart.dim), repeat=self.rank)

    def tpower(self, idx) -> int:
        return _tpow(self.chart, self.grade, self.up, idx)

    def d(self, idx, k: int) -> Jet:
        return self.chart.d(self.comps[idx], k, self.tpower(idx))

    def map(self, fn: Callable[[Jet], Jet]) -> "TensorJet":
        out = np.empty(self.comps.shape, dtype=object)
        for idx in self.indices():
            out[idx] = fn(self.comps[idx])
        return TensorJet(self.chart, self.up, self.down, out, self.grade)

    def restrict(self, order: int) -> "TensorJet":
        return self.map(lambda c: c.restrict(min(order, c.order)))

    def _same_kind(self, other: "TensorJet") -> None:
        if self.chart != other.chart:
            raise ValueError("chart mismatch")
        if (self.up, self.down) != (other.up, other.down):
            raise ValueError("valence mismatch")

    def __add__(self, other: "TensorJet") -> "TensorJet":
        self._same_kind(other)
        return TensorJet(self.chart, self.up, self.down, self.comps + other.comps, self.grade)

    def __sub__(self, other: "TensorJet") -> "TensorJet":
        self._same_kind(other)
        return TensorJet(self.chart, self.up, self.down, self.comps - other.comps, self.grade)

    def scale(self, c) -> "TensorJet":
        return self.map(lambda j: j.scale(c))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.comps.flat)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorJet):
            return NotImplemented
        if self.chart != other.chart or (self.up, self.down) != (other.up, other.down):
            return False
        return all(a == b for a, b in zip(self.comps.flat, other.comps.flat))

    __hash__ = None

    def eval0(self) -> np.ndarray:
        out = np.empty(self.comps.shape, dtype=object)
        for idx in self.indices():
            out[idx] = self.comps[idx].eval0()
        return out

    def is_symmetric(self, a: int = 0, b: int = 1) -> bool:
        for idx in self.indices():
            j = list(idx)
            j[a], j[b] = j[b], j[a]
            if not self.comps[idx] == self.comps[tuple(j)]:
                return False
        return True

    def __repr__(self) -> str:
        return f"TensorJet({self.chart!r}, ({self.up},{self.down}), grade={self.grade}, order={self.order})"


# -- jet linear algebra --------------------------------------------------------


def _dot(ch: Chart, pairs, extra=()) -> Jet:
    return jet_dot(pairs, ch.nvars, ch.jet_weights, extra)


def jet_matrix_inverse(m: Sequence[Sequence[Jet]]) -> list[list[Jet]]:
    """Gauss–Jordan over the jet ring; pivots need an invertible constant term."""
    n = len(m)
    a = [list(row) for row in m]
    proto = a[0][0]
    hi = max(x.order for row in a for x in row)
    inv = [[Jet.const(1 if i == j else 0, proto.nvars, hi, proto.weights) for j in range(n)] for i in range(n)]

    def axpy(x: Jet, f: Jet, y: Jet) -> Jet:
        # x - f*y, keeping the product's truncation order even when it is skipped
        o = mul_order(f, y)
        if y.is_zero():
            return x.restrict(o) if x.order > o else x
        return x - f * y

    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col].const_term() != 0), None)
        if piv is None:
            raise ZeroDivisionError("jet matrix is singular at the base point")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        pinv = a[col][col].inverse()
        a[col] = [x * pinv for x in a[col]]
        inv[col] = [x * pinv for x in inv[col]]
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            if f.is_zero():
                a[r] = [axpy(x, f, y) for x, y in zip(a[r], a[col])]
                inv[r] = [axpy(x, f, y) for x, y in zip(inv[r], inv[col])]
                continue
            a[r] = [axpy(x, f, y) for x, y in zip(a[r], a[col])]
            inv[r] = [axpy(x, f, y) for x, y in zip(inv[r], inv[col])]
    return inv


# -- metric quantities ---------------------------------------------------------


def metric_inverse(g: TensorJet) -> TensorJet:
    if (g.up, g.down) != (0, 2):
        raise ValueError("metric must have valence (0,2)")
    N = g.chart.dim
    for c in g.comps.flat:
        if c.nvars != g.chart.nvars:
            raise ValueError("component does not live on the metric's chart")
    rows = [[g.comps[i, j] for j in range(N)] for i in range(N)]
    try:
        inv = jet_matrix_inverse(rows)
    except ZeroDivisionError as exc:
        raise ValueError("metric is degenerate at the base point") from exc
    comps = np.empty((N, N), dtype=object)
    for i in range(N):
        for j in range(i, N):
            comps[i, j] = comps[j, i] = inv[i][j]
    return TensorJet(g.chart, 2, 0, comps, -g.grade)


def christoffel(g: TensorJet, ginv: TensorJet) -> TensorJet:
    ch = g.chart
    if ginv.chart != ch:
        raise ValueError("chart mismatch")
    N = ch.dim
    dg = {}
    for l in range(N):
        for i in range(N):
            for j in range(i, N):
                dg[l, i, j] = dg[l, j, i] = g.d((i, j), l)
    first = {}
    half = Fraction(1, 2)
    for l in range(N):
        for i in range(N):
            for j in range(i, N):
                first[l, i, j] = first[l, j, i] = (dg[i, j, l] + dg[j, i, l] - dg[l, i, j]).scale(half)

    def comp(idx):
        k, i, j = idx
        return _dot(ch, ((ginv.comps[k, l], first[l, i, j]) for l in range(N)))

    return TensorJet.build(ch, 1, 2, comp, 0, symmetric=(1, 2))


def riemann(Gamma: TensorJet) -> TensorJet:
    ch = Gamma.chart
    N = ch.dim
    G = Gamma.comps
    comps = np.empty((N,) * 4, dtype=object)
    for l in range(N):
        for k in range(N):
            for i in range(N):
                for j in range(i + 1, N):
                    pairs = []
                    for m in range(N):
                        pairs.append((G[l, i, m], G[m, j, k]))
                        pairs.append((-G[l, j, m], G[m, i, k]))
                    r = _dot(ch, pairs, (Gamma.d((l, j, k), i), -Gamma.d((l, i, k), j)))
                    comps[l, k, i, j] = r
                    comps[l, k, j, i] = -r
            for i in range(N):
                comps[l, k, i, i] = ch.zero(max(comps[l, k, 0, 1].order, comps[l, k, 1, 0].order))
    return TensorJet(ch, 1, 3, comps, 0)


def ricci(R: TensorJet) -> TensorJet:
    ch = R.chart
    N = ch.dim
    return TensorJet.build(ch, 0, 2, lambda idx: _dot(ch, (), [R.comps[i, idx[0], i, idx[1]] for i in range(N)]))


def ricci_from_christoffel(Gamma: TensorJet, pairs: Iterable[tuple[int, int]] | None = None) -> dict:
    """``Ric_{kj}`` directly from ``Γ`` for the requested index pairs (default: all ``k ≤ j``)."""
    ch = Gamma.chart
    N = ch.dim
    G = Gamma.comps
    if pairs is None:
        pairs = [(k, j) for k in range(N) for j in range(k, N)]
    trace = [_dot(ch, (), [G[i, i, m] for i in range(N)]) for m in range(N)]
    out = {}
    for k, j in pairs:
        lin = [Gamma.d((i, j, k), i) for i in range(N)]
        # the trace Γ^i_{ik} carries t-power −[k = t]
        lin.append(-ch.d(trace[k], j, -1 if ch.dilation == k else 0))
        prods = []
        for m in range(N):
            prods.append((trace[m], G[m, j, k]))
            for i in range(N):
                prods.append((-G[i, j, m], G[m, i, k]))
        out[k, j] = _dot(ch, prods, lin)
    return out


def scalar_curvature(ginv: TensorJet, Ric: TensorJet) -> Jet:
    N = ginv.chart.dim
    return _dot(ginv.chart, ((ginv.comps[i, j], Ric.comps[i, j]) for i in range(N) for j in range(N)))


def covariant_derivative(T: TensorJet, Gamma: TensorJet) -> TensorJet:
    """``(∇T)^{...}_{...; c}``: the new lower index is appended last."""
    ch = T.chart
    if Gamma.chart != ch:
        raise ValueError("chart mismatch")
    N = ch.dim
    G = Gamma.comps
    r = T.rank

    def comp(idx):
        base, c = idx[:-1], idx[-1]
        pairs = []
        for pos in range(r):
            for m in range(N):
                j = list(base)
                j[pos] = m
                v = T.comps[tuple(j)]
                if pos < T.up:
                    pairs.append((G[base[pos], c, m], v))
                else:
                    pairs.append((-G[m, c, base[pos]], v))
        return _dot(ch, pairs, (T.d(base, c),))

    return TensorJet.build(ch, T.up, T.down + 1, comp, T.grade)


def lower_first(g: TensorJet, T: TensorJet) -> TensorJet:
    """Lower the first upper index of ``T`` into the first lower slot."""
    ch = T.chart
    N = ch.dim

    def comp(idx):
        a, rest = idx[0], idx[1:]
        return _dot(ch, ((g.comps[a, m], T.comps[(m,) + rest]) for m in range(N)))

    return TensorJet.build(ch, T.up - 1, T.down + 1, comp, T.grade + g.grade)


def raise_both(ginv: TensorJet, S: TensorJet) -> TensorJet:
    ch = S.chart
    N = ch.dim
    half = [[_dot(ch, ((ginv.comps[i, a], S.comps[a, b]) for a in range(N))) for b in range(N)] for i in range(N)]
    return TensorJet.build(ch, 2, 0, lambda idx: _dot(ch, ((half[idx[0]][b], ginv.comps[b, idx[1]])
                                                           for b in range(N))))


@dataclass(frozen=True)
class SchoutenData:
    P: TensorJet
    J: Jet


def schouten(g: TensorJet, ginv: TensorJet, Ric: TensorJet | None = None) -> SchoutenData:
    n = g.chart.dim
    if n < 3:
        raise ValueError("Schouten tensor needs dimension at least 3")
    if Ric is None:
        Ric = ricci(riemann(christoffel(g, ginv)))
    scal = scalar_curvature(ginv, Ric)
    J = scal.scale(Fraction(1, 2 * (n - 1)))
    P = TensorJet.build(g.chart, 0, 2, lambda idx: (Ric.comps[idx] - J * g.comps[idx]).scale(Fraction(1, n - 2)),
                        symmetric=(0, 1))
    return SchoutenData(P, J)


def weyl(g: TensorJet, Rdown: TensorJet, P: TensorJet) -> TensorJet:
    """``W_{lkij} = R_{lkij} − (g_{li}P_{kj} − g_{lj}P_{ki} + g_{kj}P_{li} − g_{ki}P_{lj})``."""
    gc, pc = g.comps, P.comps

    def comp(idx):
        l, k, i, j = idx
        kul = gc[l, i] * pc[k, j] - gc[l, j] * pc[k, i] + gc[k, j] * pc[l, i] - gc[k, i] * pc[l, j]
        return Rdown.comps[idx] - kul

    return TensorJet.build(g.chart, 0, 4, comp)


def cotton(P: TensorJet, Gamma: TensorJet) -> TensorJet:
    """``C_{ijk} = ∇_k P_{ij} − ∇_j P_{ik}``."""
    dP = covariant_derivative(P, Gamma)
    return TensorJet.build(P.chart, 0, 3, lambda idx: dP.comps[idx[0], idx[1], idx[2]] - dP.comps[idx[0], idx[2], idx[1]])


def bach(g: TensorJet, ginv: TensorJet, sign: int = 1) -> TensorJet:
    """``B_{ij} = ∇^k C_{ijk} + sign · P^{kl} W_{ikjl}``; ``sign = -1`` exists for negative controls."""
    ch = g.chart
    N = ch.dim
    Gamma = christoffel(g, ginv)
    R = riemann(Gamma)
    Ric = ricci(R)
    sd = schouten(g, ginv, Ric)
    W = weyl(g, lower_first(g, R), sd.P)
    dC = covariant_derivative(cotton(sd.P, Gamma), Gamma)
    Pup = raise_both(ginv, sd.P)

    def comp(idx):
        i, j = idx
        div = _dot(ch, ((ginv.comps[k, l], dC.comps[i, j, k, l]) for k in range(N) for l in range(N)))
        curv = _dot(ch, ((Pup.comps[k, l], W.comps[i, k, j, l]) for k in range(N) for l in range(N)))
        return div + curv.scale(sign)

    return TensorJet.build(ch, 0, 2, comp)


def metric_from_dict(chart: Chart, table: dict, order: int) -> TensorJet:
    """Build a symmetric (0,2) tensor from ``{(i, j): {multi_index: rational}}`` (missing entries zero)."""
    N = chart.dim
    comps = np.empty((N, N), dtype=object)
    for i in range(N):
        for j in range(i, N):
            d = table.get((i, j), table.get((j, i), {}))
            comps[i, j] = comps[j, i] = Jet.from_dict(d, chart.nvars, order, chart.jet_weights)
    return TensorJet(chart, 0, 2, comps)


def constant_matrix(chart: Chart, m, order: int) -> TensorJet:
    N = chart.dim
    comps = np.empty((N, N), dtype=object)
    for i in range(N):
        for j in range(N):
            comps[i, j] = chart.const(to_fmpq(m[i][j]), order)
    return TensorJet(chart, 0, 2, comps)
