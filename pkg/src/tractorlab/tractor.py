"""Standard tractors realised twice: on the ambient metric along ``G`` and in a scale ``g``.

Fibre basis at ``z`` is the homogeneous frame of :mod:`tractorlab.holonomy`:
index 0 is ``d/drho`` (the ``Y`` slot), index 1 is ``T`` (the ``X`` slot),
index ``2+i`` is ``d/dx^i`` (the ``Z`` slots).  A tractor field over the
``x``-chart is a list of ``n+2`` ``x``-jets giving its frame components on
the slice ``t = 1, rho = 0``.  A weight-``w`` vector has ambient homogeneity
degree ``w - 1``; a weight-``w`` covector has degree ``w + 1``.

In a scale the same slots read ``U = sigma Y + mu^a Z_a + tau X``, i.e.
frame components ``(sigma, tau, mu)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .ambient import RHO, T, AmbientMetricJet, CheckResult, ambient_chart, rho_coeff
from .exactla import nullspace
from .holonomy import (
    HolonomySpan,
    ambient_connection_matrices,
    common_kernel,
    curvature_matrices,
    scale_connection_matrices,
)
from .jetcalc import Jet, jet_dot
from .tensorgeo import (
    Chart,
    OrderExhausted,
    TensorJet,
    christoffel,
    covariant_derivative,
    metric_inverse,
    schouten,
)

__all__ = [
    "TractorJet",
    "SplittingSections",
    "TractorMetricAtZ",
    "tractor_fiber",
    "invariant_lift",
    "tractor_connection_ambient",
    "tractor_connection_scale",
    "connection_agreement",
    "metric_compatibility",
    "curvature_commutator_check",
    "splitting_sections",
    "tractor_metric",
    "ScaleData",
    "tractor_D_scale",
    "tractor_D_ambient",
    "density_extension",
    "gp_curvature_identity_check",
    "parallel_tractor_detect",
    "einstein_tractor",
]


@dataclass
class TractorJet:
    components: list
    weight: Fraction = Fraction(0)
    kind: str = "vector"

    def __post_init__(self):
        if self.kind not in ("vector", "covector"):
            raise ValueError(f"kind must be 'vector' or 'covector', got {self.kind!r}")
        self.weight = Fraction(self.weight)
        self.components = list(self.components)

    @property
    def grade(self) -> Fraction:
        """Ambient homogeneity degree."""
        return self.weight - 1 if self.kind == "vector" else self.weight + 1

    @property
    def size(self) -> int:
        return len(self.components)

    @property
    def order(self) -> int:
        return min(c.order for c in self.components)

    def at_z(self) -> list[Fraction]:
        return [c.eval0() for c in self.components]

    def restrict(self, order: int) -> "TractorJet":
        return TractorJet([c.restrict(order) for c in self.components], self.weight, self.kind)

    def __add__(self, other: "TractorJet") -> "TractorJet":
        self._same_kind(other)
        return TractorJet([a + b for a, b in zip(self.components, other.components)], self.weight, self.kind)

    def __sub__(self, other: "TractorJet") -> "TractorJet":
        self._same_kind(other)
        return TractorJet([a - b for a, b in zip(self.components, other.components)], self.weight, self.kind)

    def scale(self, c) -> "TractorJet":
        return TractorJet([x.scale(c) for x in self.components], self.weight, self.kind)

    def mul(self, f: Jet) -> "TractorJet":
        return TractorJet([f * x for x in self.components], self.weight, self.kind)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TractorJet):
            return NotImplemented
        return (self.kind == other.kind and self.weight == other.weight and self.size == other.size
                and all(a == b for a, b in zip(self.components, other.components)))

    def _same_kind(self, other: "TractorJet") -> None:
        if (self.kind, self.weight, self.size) != (other.kind, other.weight, other.size):
            raise ValueError("tractors of different kind, weight or rank")

    @classmethod
    def from_triple(cls, sigma: Jet, mu: Sequence[Jet], tau: Jet, weight=0) -> "TractorJet":
        return cls([sigma, tau] + list(mu), weight, "vector")

    def triple(self) -> tuple[Jet, list[Jet], Jet]:
        c = self.components
        return c[RHO], c[2:], c[T]


@dataclass
class SplittingSections:
    """Covectors in the frame basis, as ``x``-jets along ``G``.

    ``Z[i]`` is ``Z_A^i`` (index ``i`` up), so ``V_A = phi X_A + psi_i Z_A^i + r Y_A``
    has frame components ``(phi, r, psi)``.
    """

    X: TractorJet
    Y: TractorJet
    Z: list
    scale: TensorJet

    def compose(self, phi: Jet, psi: Sequence[Jet], r: Jet) -> TractorJet:
        comps = [phi * x + r * y for x, y in zip(self.X.components, self.Y.components)]
        for p, z in zip(psi, self.Z):
            comps = [c + p * zc for c, zc in zip(comps, z.components)]
        return TractorJet(comps, self.X.weight, "covector")

    def decompose(self, V: TractorJet) -> tuple[Jet, list[Jet], Jet]:
        """Inverse of :meth:`compose` read off with the dual vectors ``Y^A, Z^A_i, X^A``."""
        c = V.components
        return c[RHO], list(c[2:]), c[T]


@dataclass
class TractorMetricAtZ:
    h: list
    signature: tuple[int, int]

    def is_symmetric(self) -> bool:
        N = len(self.h)
        return all(self.h[i][j] == self.h[j][i] for i in range(N) for j in range(N))


@dataclass
class TractorFiber:
    basis: list
    grades: list
    distinguished: int
    tangent_to_G: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.basis)


def _along_G(f: Jet) -> Jet:
    c = rho_coeff(f, 0)
    if c is None:
        raise OrderExhausted("ambient jet does not reach rho = 0")
    return c


def _h_along_G(amb: AmbientMetricJet) -> list[list[Jet]]:
    key = "h_along_G"
    if key not in amb._cache:
        N = amb.n + 2
        amb._cache[key] = [[_along_G(amb.assembled.comps[a, b]) for b in range(N)] for a in range(N)]
    return amb._cache[key]


def _signature(m) -> tuple[int, int]:
    """Sylvester inertia via exact symmetric elimination."""
    a = [[Fraction(x) for x in row] for row in m]
    N = len(a)
    pos = neg = 0
    idx = list(range(N))
    while idx:
        piv = next((i for i in idx if a[i][i] != 0), None)
        if piv is None:
            # a zero diagonal with an off-diagonal entry: combine two rows/columns
            pair = next(((i, j) for i in idx for j in idx if i != j and a[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            for k in range(N):
                a[i][k] += a[j][k]
            for k in range(N):
                a[k][i] += a[k][j]
            continue
        d = a[piv][piv]
        if d > 0:
            pos += 1
        else:
            neg += 1
        idx.remove(piv)
        for i in idx:
            f = a[i][piv] / d
            if f:
                for k in range(N):
                    a[i][k] -= f * a[piv][k]
                for k in range(N):
                    a[k][i] -= f * a[k][piv]
    return pos, neg


# -- fibre, lifts, metric ---------------------------------------------------------


def tractor_fiber(amb: AmbientMetricJet) -> TractorFiber:
    N = amb.n + 2
    basis = [[Fraction(int(i == j)) for j in range(N)] for i in range(N)]
    h = amb.h()
    perp = nullspace([h[T]], N)
    return TractorFiber(basis, [-1] * N, T, perp)


def invariant_lift(eta: Sequence, n: int, order: int) -> TensorJet:
    """``sum eta^i d/dx^i`` as a degree-0 ambient vector field jet."""
    if len(eta) != n:
        raise ValueError(f"tangent vector needs {n} components")
    ch = ambient_chart(n)
    comps = np.empty((n + 2,), dtype=object)
    comps[RHO] = ch.zero(order)
    comps[T] = ch.zero(order)
    for i, e in enumerate(eta):
        if isinstance(e, Jet):
            raise TypeError("invariant_lift takes a vector at x (constant components)")
        comps[2 + i] = ch.const(e, order)
    return TensorJet(ch, 1, 0, comps, grade=0)


def tractor_metric(amb: AmbientMetricJet) -> TractorMetricAtZ:
    h = amb.h()
    return TractorMetricAtZ(h, _signature(h))


def _xjet(c, like: Jet) -> Jet:
    return c if isinstance(c, Jet) else Jet.const(c, like.nvars, like.order, like.weights)


def _apply(m, u: Sequence[Jet], nv: int) -> list[Jet]:
    return [jet_dot(((m[P][Q], u[Q]) for Q in range(len(u))), nv) for P in range(len(m))]


def _directional(eta: Sequence, U: TractorJet, omega: dict, nv: int, off: int) -> list[Jet]:
    """``sum_i eta^i (d_i u + omega_i u)`` with ``omega`` keyed ``off + i``."""
    u = U.components
    acc = None
    for i, e in enumerate(eta):
        if not isinstance(e, Jet) and e == 0:
            continue
        e = _xjet(e, u[0])
        du = [x.partial(i) if x.order >= 1 else _raise_short(i) for x in u]
        term = [a + b for a, b in zip(du, _apply(omega[off + i], u, nv))]
        term = [e * x for x in term]
        acc = term if acc is None else [a + b for a, b in zip(acc, term)]
    if acc is None:
        return [Jet.zero(x.nvars, max(x.order - 1, 0), x.weights) for x in u]
    return acc


def _raise_short(i: int):
    raise OrderExhausted(f"d/dx{i + 1} of a tractor component known only to order 0")


def tractor_connection_ambient(amb: AmbientMetricJet, eta: Sequence, U: TractorJet) -> TractorJet:
    """``nabla~`` along a lift of ``eta`` restricted to ``G``.

    ``eta`` has ``n`` tangential components (constants or ``x``-jets) or
    ``n + 2`` frame components with zero ``rho`` entry; a ``T`` component
    contributes ``nabla~_T U = w U`` for a weight-``w`` vector.
    """
    n = amb.n
    if U.kind != "vector" or U.size != n + 2:
        raise ValueError("expected a standard tractor vector")
    eta = list(eta)
    cT = 0
    if len(eta) == n + 2:
        if not _is_zero_entry(eta[RHO]):
            raise ValueError("direction must be tangent to G (zero rho component)")
        cT = eta[T]
        eta = eta[2:]
    out = _directional(eta, U, _omega_along_G(amb), n, 2)
    if not _is_zero_entry(cT):
        # zeta_T acts on degree w-1 components by w-1; omega_T is the identity
        ct = _xjet(cT, U.components[0])
        out = [o + ct * x.scale(U.weight) for o, x in zip(out, U.components)]
    return TractorJet(out, U.weight, "vector")


def _omega_along_G(amb: AmbientMetricJet) -> dict:
    key = "omega_along_G"
    if key not in amb._cache:
        amb._cache[key] = {a: [[_along_G(x) for x in row] for row in m]
                           for a, m in ambient_connection_matrices(amb).items() if a >= 2}
    return amb._cache[key]


def _is_zero_entry(e) -> bool:
    return e.is_zero() if isinstance(e, Jet) else e == 0


def tractor_connection_scale(g: TensorJet, eta: Sequence, triple: tuple) -> tuple[Jet, list[Jet], Jet]:
    """Scale-form derivative of ``(sigma, mu^b, tau)``:

    ``(d sigma - mu_a, nabla_a mu^b + delta_a^b tau + P_a^b sigma, d tau - P_ab mu^b)``
    contracted with ``eta^a``.
    """
    sigma, mu, tau = triple
    U = TractorJet.from_triple(sigma, mu, tau)
    omega = scale_connection_matrices(g)
    out = _directional(list(eta), U, omega, g.chart.dim, 0)
    return out[RHO], out[2:], out[T]


def connection_agreement(amb: AmbientMetricJet) -> CheckResult:
    """Tangential ambient connection matrices on ``G`` equal the scale-form ones entrywise."""
    n = amb.n
    A = ambient_connection_matrices(amb)
    S = scale_connection_matrices(amb.g)
    bad = []
    for a in range(n):
        for P in range(n + 2):
            for Q in range(n + 2):
                x = _along_G(A[2 + a][P][Q])
                y = S[a][P][Q]
                o = min(x.order, y.order)
                if not x.restrict(o) == y.restrict(o):
                    bad.append((a, P, Q))
    return CheckResult("connection_agreement", not bad, "", bad)


def metric_compatibility(amb: AmbientMetricJet, eta: Sequence, U: TractorJet, V: TractorJet) -> CheckResult:
    """``eta h(U, V) = h(nabla U, V) + h(U, nabla V)`` along ``G``."""
    n = amb.n
    h = _h_along_G(amb)
    N = n + 2

    def pair(a, b):
        return jet_dot(((h[P][Q], a[P] * b[Q]) for P in range(N) for Q in range(N)), n)

    lhs = None
    base = pair(U.components, V.components)
    for i, e in enumerate(eta):
        if _is_zero_entry(e):
            continue
        term = _xjet(e, base) * base.partial(i)
        lhs = term if lhs is None else lhs + term
    dU = tractor_connection_ambient(amb, eta, U).components
    dV = tractor_connection_ambient(amb, eta, V).components
    rhs = pair(dU, V.components) + pair(U.components, dV)
    if lhs is None:
        lhs = rhs.scale(0)
    return CheckResult("metric_compatibility", (lhs - rhs).is_zero(), "", [])


def curvature_commutator_check(amb: AmbientMetricJet, U: TractorJet) -> CheckResult:
    """``(nabla_i nabla_j - nabla_j nabla_i) U = R~(d_i, d_j) U`` along ``G`` for all ``i < j``."""
    n = amb.n
    R = amb.R.comps
    bad = []
    e = [[int(k == i) for k in range(n)] for i in range(n)]
    first = [tractor_connection_ambient(amb, e[i], U) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            lhs = tractor_connection_ambient(amb, e[i], first[j]) - tractor_connection_ambient(amb, e[j], first[i])
            endo = [[_along_G(R[P, Q, 2 + i, 2 + j]) for Q in range(n + 2)] for P in range(n + 2)]
            rhs = _apply(endo, U.components, n)
            diff = [a - b for a, b in zip(lhs.components, rhs)]
            if not all(d.is_zero() for d in diff):
                bad.append((i, j))
    return CheckResult("curvature_commutator", not bad, "", bad)


# -- splitting and the D-operator -------------------------------------------------


def splitting_sections(amb: AmbientMetricJet, g: TensorJet | None = None) -> SplittingSections:
    """``X = g~(T, .)``, ``Y = g~(d/drho, .)``, ``Z^i = g^{ij} g~(d/dx^j, .)`` along ``G``."""
    g = amb.g if g is None else g
    n = amb.n
    N = n + 2
    h = _h_along_G(amb)
    ginv = metric_inverse(g)
    X = TractorJet(h[T], 1, "covector")
    Y = TractorJet(h[RHO], -1, "covector")
    Z = []
    for i in range(n):
        comps = [jet_dot(((ginv.comps[i, j], h[2 + j][A]) for j in range(n)), n) for A in range(N)]
        Z.append(TractorJet(comps, -1, "covector"))
    return SplittingSections(X, Y, Z, g)


@dataclass
class ScaleData:
    """Inverse metric, contracted Christoffel symbols ``g^{ij} Gamma^k_ij`` and ``J`` of a scale."""

    g: TensorJet
    ginv: TensorJet
    trace_gamma: list
    J: Jet

    @classmethod
    def of(cls, g: TensorJet) -> "ScaleData":
        ginv = metric_inverse(g)
        n = g.chart.dim
        Gam = christoffel(g, ginv)
        tr = [jet_dot(((ginv.comps[i, j], Gam.comps[k, i, j]) for i in range(n) for j in range(n)), n)
              for k in range(n)]
        return cls(g, ginv, tr, schouten(g, ginv).J)

    def laplacian(self, v: Jet) -> Jet:
        """``g^{ij} (d_i d_j v - Gamma^k_ij d_k v)``."""
        n = self.g.chart.dim
        ginv = self.ginv.comps
        d = [v.partial(i) for i in range(n)]
        pairs = [(ginv[i, i], d[i].partial(i)) for i in range(n)]
        pairs += [(ginv[i, j].scale(2), d[i].partial(j)) for i in range(n) for j in range(i + 1, n)]
        pairs += [(-self.trace_gamma[k], d[k]) for k in range(n)]
        return jet_dot(pairs, n)


def tractor_D_scale(v: Jet, w, g: TensorJet | ScaleData) -> TractorJet:
    """``D_A V = w(n+2w-2) Y_A V + (n+2w-2) Z_A^a nabla_a V - X_A (Delta V + w J V)``.

    Pass a :class:`ScaleData` to reuse the scale's geometry across many inputs.
    """
    data = g if isinstance(g, ScaleData) else ScaleData.of(g)
    n = data.g.chart.dim
    w = Fraction(w)
    c = n + 2 * w - 2
    box = data.laplacian(v) + (data.J * v).scale(w)
    comps = [None] * (n + 2)
    comps[RHO] = -box
    comps[T] = v.scale(w * c)
    for a in range(n):
        comps[2 + a] = v.partial(a).scale(c)
    return TractorJet(comps, w - 1, "covector")


def density_extension(v: Jet, w, n: int, order: int, tail: Sequence[Jet] = ()) -> TensorJet:
    """``V~ = t^w (v + rho u_1 + rho^2 u_2 + ...)`` as a grade-``w`` ambient scalar."""
    ch = ambient_chart(n)
    terms = {}
    for k, f in enumerate([v] + list(tail)):
        for e, c in f.to_dict().items():
            if 2 * k + sum(e) <= order:
                key = (k,) + tuple(e)
                terms[key] = terms.get(key, 0) + c
    known = min([v.order] + [f.order + 2 * (k + 1) for k, f in enumerate(tail)])
    if known < order:
        raise ValueError(f"density data known to weighted order {known} < {order}")
    comps = np.empty((), dtype=object)
    comps[()] = Jet.from_dict(terms, ch.nvars, order, ch.jet_weights)
    return TensorJet(ch, 0, 0, comps, grade=Fraction(w))


def _restricted(amb: AmbientMetricJet, o: int) -> tuple[TensorJet, TensorJet, list[Jet]]:
    """``Gamma~``, ``g~^{-1}`` cut to order ``o`` and ``g~^{AB} Gamma~^C_AB``, cached per order."""
    key = ("restricted", o)
    if key not in amb._cache:
        if o >= amb.order:
            Gam, ginv = amb.Gamma, amb.ginv
        else:
            cut = lambda x: x.restrict(o) if x.order > o else x
            Gam, ginv = amb.Gamma.map(cut), amb.ginv.map(cut)
        N = amb.n + 2
        ch = amb.chart
        tr = [jet_dot(((ginv.comps[A, B], Gam.comps[C, A, B]) for A in range(N) for B in range(N)),
                      ch.nvars, ch.jet_weights) for C in range(N)]
        amb._cache[key] = (Gam, ginv, tr)
    return amb._cache[key]


def tractor_D_ambient(amb: AmbientMetricJet, Vt: TensorJet, w) -> TractorJet:
    """``D_A V = (n+2w-2) nabla~_A V~ - X_A Delta~ V~`` along ``G``."""
    n = amb.n
    N = n + 2
    w = Fraction(w)
    if Vt.grade != w:
        raise ValueError(f"extension has homogeneity {Vt.grade}, expected {w}")
    c = n + 2 * w - 2
    o = min(Vt.order, amb.order)
    Gam, ginv, tr = _restricted(amb, o)
    dV = covariant_derivative(Vt.restrict(o), Gam)
    g = ginv.comps
    pairs = [(g[A, A], dV.d((A,), A)) for A in range(N)]
    pairs += [(g[A, B].scale(2), dV.d((A,), B)) for A in range(N) for B in range(A + 1, N)]
    pairs += [(-tr[C], dV.comps[C]) for C in range(N)]
    lap0 = _along_G(jet_dot(pairs, amb.chart.nvars, amb.chart.jet_weights))
    X = _h_along_G(amb)[T]
    comps = []
    for A in range(N):
        term = _along_G(dV.comps[A]).scale(c)
        if not X[A].is_zero():
            term = term - X[A] * lap0
        comps.append(term)
    return TractorJet(comps, w - 1, "covector")


# -- curvature identity and parallel tractors ----------------------------------------


def _coupled_divergence(g: TensorJet, omega: dict, E: dict) -> dict:
    """``S_b = g^{cd} (nabla_d E)_{cb}`` with the tractor-coupled Levi-Civita derivative.

    ``(nabla_d E)_{cb} = d_d E_cb + [omega_d, E_cb] - Gamma^e_{dc} E_eb - Gamma^e_{db} E_ce``;
    the metric contraction is taken before the brackets.
    """
    ch = g.chart
    n = ch.dim
    N = n + 2
    nv, wts = ch.nvars, ch.jet_weights
    ginv = metric_inverse(g).comps
    Gam = christoffel(g, metric_inverse(g)).comps
    zero = ch.zero(g.order)
    Z = [[zero] * N for _ in range(N)]

    def E_(a, b):
        if a == b:
            return Z
        return E[(a, b)] if a < b else [[-x for x in row] for row in E[(b, a)]]

    def dot(pairs):
        return jet_dot(pairs, nv, wts)

    Ef = {(a, b): E_(a, b) for a in range(n) for b in range(n)}
    dE = {(d, a, b): [[ch.d(x, d) for x in row] for row in Ef[a, b]]
          for d in range(n) for a in range(n) for b in range(n) if a != b}
    trG = [dot((ginv[c, d], Gam[e, d, c]) for c in range(n) for d in range(n)) for e in range(n)]
    S = {}
    for b in range(n):
        A = {d: [[dot((ginv[c, d], Ef[c, b][P][Q]) for c in range(n)) for Q in range(N)] for P in range(N)]
             for d in range(n)}
        Gb = [[dot((ginv[c, d], Gam[e, d, b]) for d in range(n)) for e in range(n)] for c in range(n)]
        out = []
        for P in range(N):
            row = []
            for Q in range(N):
                pairs = [(ginv[c, d], dE[d, c, b][P][Q]) for c in range(n) for d in range(n) if c != b]
                for d in range(n):
                    for R in range(N):
                        pairs.append((omega[d][P][R], A[d][R][Q]))
                        pairs.append((-A[d][P][R], omega[d][R][Q]))
                pairs += [(-trG[e], Ef[e, b][P][Q]) for e in range(n)]
                pairs += [(-Gb[c][e], Ef[c, e][P][Q]) for c in range(n) for e in range(n)]
                row.append(dot(pairs))
            out.append(row)
        S[b] = out
    return S


def gp_curvature_identity_check(amb: AmbientMetricJet, g: TensorJet | None = None) -> CheckResult:
    """Ambient curvature along ``G`` from tractor data:

    ``R~(zeta_2+a, zeta_2+b) = R_ab``, ``R~(d_rho, zeta_2+b) = -(1/(n-4)) nabla^c R_cb``,
    every ``T`` slot zero, with ``R_ab`` the scale-form tractor curvature.
    """
    n = amb.n
    if n == 4:
        raise ValueError("the identity divides by n - 4; n = 4 is excluded")
    g = amb.g if g is None else g
    N = n + 2
    ch = g.chart
    omega = scale_connection_matrices(g)
    E = curvature_matrices(omega, lambda f, a: ch.d(f, a), range(n), ch.nvars, ch.jet_weights)
    S = _coupled_divergence(g, omega, E)
    R = amb.R.comps
    k = Fraction(-1, n - 4)
    bad = []
    orders = []

    def cmp(lhs: Jet, rhs: Jet, tag):
        o = min(lhs.order, rhs.order)
        orders.append(o)
        if not lhs.restrict(o) == rhs.restrict(o):
            bad.append(tag)

    for A in range(N):
        for B in range(A + 1, N):
            for P in range(N):
                for Q in range(N):
                    try:
                        lhs = _along_G(R[P, Q, A, B])
                    except OrderExhausted:
                        bad.append((P, Q, A, B, "undetermined"))
                        continue
                    if A >= 2:
                        rhs = E[(A - 2, B - 2)][P][Q]
                    elif A == RHO and B >= 2:
                        rhs = S[B - 2][P][Q].scale(k)
                    else:
                        rhs = ch.zero(lhs.order)
                    cmp(lhs, rhs, (P, Q, A, B))
    detail = f"compared to x-order {min(orders)}" if orders else ""
    return CheckResult("gp_curvature_identity", not bad, detail, bad)


def einstein_tractor(g: TensorJet) -> list[Fraction]:
    """Frame components at ``z`` of ``(sigma, mu, tau) = (1, 0, -J/n)``."""
    n = g.chart.dim
    J = schouten(g, metric_inverse(g)).J.eval0()
    v = [Fraction(0)] * (n + 2)
    v[RHO] = Fraction(1)
    v[T] = -J / n
    return v


def parallel_tractor_detect(span: HolonomySpan, h) -> list[tuple[list[Fraction], Fraction]]:
    """Common kernel of the span with the ``h``-norm of each basis vector."""
    out = []
    for v in common_kernel(span):
        norm = sum((v[i] * h[i][j] * v[j] for i in range(len(v)) for j in range(len(v))), Fraction(0))
        out.append((v, norm))
    return out
