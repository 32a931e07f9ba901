"""Ambient metrics in normal form, solved order by order in ``rho``.

Coordinates are ordered ``(rho, t, x1, ..., xn)``.  The metric is

    g~ = 2 rho dt^2 + 2 t dt drho + t^2 g_rho,   g_rho = sum_m g^(m) rho^m / m!

and is stored on the slice ``t = 1`` (see :mod:`tractorlab.tensorgeo`).
Jets live in the variables ``(rho, x1..xn)`` with ``rho`` of weight 2, so
the weighted order ``W`` knows ``g^(m)`` to ``x``-order ``W - 2m``.

Each unknown ``g^(m)`` is found from the requirement that the ``rho^(m-1)``
coefficient of the tangential Ricci block vanishes.  The map from ``g^(m)``
to that coefficient is affine and pointwise; its linear part is sampled by
probes at low order and then inverted by defect correction at full order.
Nothing about the expected form of the linear part is assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Sequence

import flint
import numpy as np

from .jetcalc import Jet, jet_dot, to_fmpq
from .tensorgeo import (
    Chart,
    TensorJet,
    christoffel,
    jet_matrix_inverse,
    jsum,
    metric_inverse,
    riemann,
    ricci_from_christoffel,
    covariant_derivative,
)

__all__ = [
    "RHO",
    "T",
    "ambient_chart",
    "AmbientMetricJet",
    "ResidualCoefficient",
    "ObstructionReport",
    "CheckResult",
    "build_ambient",
    "assemble",
    "check_straightness",
    "check_initial",
    "check_homogeneity",
    "check_T_form",
    "ricci_residual",
    "obstruction",
    "classify_residuals",
    "trace_free_part",
    "rho_coeff",
    "SingularSolve",
    "NORMAL_FORM_T_EXPONENTS",
]

RHO, T = 0, 1
# structural components (exact polynomials) are materialised this far past W
_MARGIN = 4


class SingularSolve(RuntimeError):
    """The linearised Ricci condition could not be inverted."""


def ambient_chart(n: int) -> Chart:
    return Chart(["rho", "t"] + [f"x{i + 1}" for i in range(n)], [2, 0] + [1] * n, dilation=T)


def NORMAL_FORM_T_EXPONENTS(n: int) -> np.ndarray:
    """Power of ``t`` multiplying each component in the normal form."""
    e = np.full((n + 2, n + 2), 2, dtype=int)
    e[RHO, RHO] = 2
    e[RHO, T] = e[T, RHO] = 1
    e[T, T] = 0
    e[T, 2:] = e[2:, T] = 1
    e[RHO, 2:] = e[2:, RHO] = 2
    return e


def rho_coeff(f: Jet, k: int) -> Jet | None:
    """Coefficient of ``rho^k`` as a jet in ``x``; ``None`` if ``f`` does not know it."""
    return f.first_var_coeff(k)


def lift_x(f: Jet, m: int, chart: Chart, order: int, scale=1) -> Jet:
    """``scale * f(x) * rho^m`` as an ambient jet of weighted ``order``."""
    need = order - 2 * m
    if need < 0:
        return chart.zero(order)
    if f.order < need:
        raise ValueError(f"x-jet of order {f.order} cannot fill weighted order {order} at rho^{m}")
    d = {(m,) + tuple(e): c * scale for e, c in f.to_dict().items() if sum(e) <= need}
    return Jet.from_dict(d, chart.nvars, order, chart.jet_weights)


def assemble(coeffs: Sequence[TensorJet | None], n: int, order: int) -> TensorJet:
    """Normal-form ``g~`` from ``[g^(0), g^(1), ...]`` (``None`` entries count as zero)."""
    ch = ambient_chart(n)
    N = n + 2
    hi = order + _MARGIN
    comps = np.empty((N, N), dtype=object)
    for a in range(N):
        for b in range(N):
            comps[a, b] = ch.zero(hi)
    comps[RHO, T] = comps[T, RHO] = ch.const(1, hi)
    comps[T, T] = ch.coord(RHO, hi).scale(2)
    for i in range(n):
        for j in range(i, n):
            terms = [lift_x(c.comps[i, j], m, ch, order, Fraction(1, factorial(m)))
                     for m, c in enumerate(coeffs) if c is not None]
            comps[2 + i, 2 + j] = comps[2 + j, 2 + i] = jsum(terms, ch.zero(order))
    return TensorJet(ch, 0, 2, comps, grade=2)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    offending: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


@dataclass
class ResidualCoefficient:
    """``rho^k`` coefficient of ``Ric(g~)``; ``comps[(a, b)]`` is an ``x``-jet or ``None`` if undetermined."""

    k: int
    comps: dict
    n: int

    def determined(self):
        return {ab: c for ab, c in self.comps.items() if c is not None}

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.determined().values())

    @property
    def tangential_determined(self) -> bool:
        return all(self.comps[(2 + i, 2 + j)] is not None for i in range(self.n) for j in range(i, self.n))

    def t_components_zero(self) -> bool:
        return all(c.is_zero() for (a, b), c in self.determined().items() if T in (a, b))

    def tangential(self) -> list[list[Jet]]:
        return [[self.comps[tuple(sorted((2 + i, 2 + j)))] for j in range(self.n)] for i in range(self.n)]


@dataclass
class ObstructionReport:
    order_checked: int
    residual_coefficient: TensorJet
    is_tracefree: bool
    is_tangential: bool


@dataclass
class AmbientMetricJet:
    n: int
    signature: tuple[int, int]
    g: TensorJet
    g_rho_coeffs: list
    order: int
    solve_depth: int
    assembled: TensorJet
    ambiguity: TensorJet | None = None
    diagnostics: dict = field(default_factory=dict)
    t_exponents: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def parity(self) -> str:
        return "even" if self.n % 2 == 0 else "odd"

    @property
    def chart(self) -> Chart:
        return self.assembled.chart

    @property
    def ginv(self) -> TensorJet:
        if "ginv" not in self._cache:
            self._cache["ginv"] = metric_inverse(self.assembled)
        return self._cache["ginv"]

    @property
    def Gamma(self) -> TensorJet:
        if "Gamma" not in self._cache:
            self._cache["Gamma"] = christoffel(self.assembled, self.ginv)
        return self._cache["Gamma"]

    @property
    def R(self) -> TensorJet:
        if "R" not in self._cache:
            self._cache["R"] = riemann(self.Gamma)
        return self._cache["R"]

    @property
    def ricci(self) -> dict:
        if "Ric" not in self._cache:
            self._cache["Ric"] = ricci_from_christoffel(self.Gamma)
        return self._cache["Ric"]

    def h(self) -> list[list[Fraction]]:
        """``g~`` at ``z`` in the frame basis."""
        return [[self.assembled.comps[a, b].eval0() for b in range(self.n + 2)] for a in range(self.n + 2)]


# -- the solve ------------------------------------------------------------------


def _ricci_equations(coeffs, n: int, order: int, m: int):
    """Tangential ``Ric`` at ``rho^(m-1)`` and, for ``m >= 2``, ``Ric_{rho rho}`` at ``rho^(m-2)``."""
    gt = assemble(coeffs, n, order)
    Gamma = christoffel(gt, metric_inverse(gt))
    pairs = [(2 + i, 2 + j) for i in range(n) for j in range(i, n)]
    if m >= 2:
        pairs.append((RHO, RHO))
    ric = ricci_from_christoffel(Gamma, pairs)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            c = rho_coeff(ric[2 + i, 2 + j], m - 1)
            if c is None:
                raise ValueError(f"weighted order {order} does not determine the rho^{m - 1} Ricci coefficient")
            out[i][j] = out[j][i] = c
    rr = None
    if m >= 2:
        rr = rho_coeff(ric[RHO, RHO], m - 2)
        if rr is None:
            raise ValueError(f"weighted order {order} does not determine Ric_rho,rho at rho^{m - 2}")
    return out, rr


def _sym_tensor(chart: Chart, rows) -> TensorJet:
    n = chart.dim
    comps = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            comps[i, j] = rows[i][j]
    return TensorJet(chart, 0, 2, comps)


def _restrict_x(t: TensorJet, order: int) -> TensorJet:
    return t.map(lambda c: c.restrict(order) if c.order >= order else _pad(c, order))


def _pad(c: Jet, order: int) -> Jet:
    return Jet(c.nvars, order, c.parts, c.weights)


def _trace(ginv: TensorJet, rows, order: int) -> Jet:
    n = ginv.chart.dim
    pairs = [(ginv.comps[i, j].restrict(min(order, ginv.comps[i, j].order)), rows[i][j])
             for i in range(n) for j in range(n)]
    t = jet_dot(pairs, n)
    return t.restrict(order) if t.order > order else t


def _independent_rows(L0) -> list[int]:
    """Greedy choice of rows of the constant matrix ``L0`` spanning its row space."""
    chosen: list[int] = []
    rank = 0
    for r in range(len(L0)):
        trial = flint.fmpq_mat([[to_fmpq(x) for x in L0[i]] for i in chosen + [r]])
        if trial.rank() > rank:
            chosen.append(r)
            rank += 1
    return chosen


def _solve_step(coeffs, g: TensorJet, ginv: TensorJet, n: int, order: int, m: int,
                trace_only: bool, fixed: TensorJet | None, probe_order: int, log: dict) -> TensorJet:
    xch = g.chart
    q = order - 2 * m
    pairs = [(i, j) for i in range(n) for j in range(i, n)]

    def unknowns_to_h(vals, o):
        # vals: list of x-jets; trace_only -> [phi], else one per pair
        rows = [[xch.zero(o)] * n for _ in range(n)]
        if trace_only:
            phi = vals[0]
            for i in range(n):
                for j in range(n):
                    rows[i][j] = phi * g.comps[i, j].restrict(o)
        else:
            for (i, j), v in zip(pairs, vals):
                rows[i][j] = rows[j][i] = v
        if fixed is not None:
            rows = [[rows[i][j] + fixed.comps[i, j].restrict(o) for j in range(n)] for i in range(n)]
        return _sym_tensor(xch, rows)

    def residual(h: TensorJet, o: int) -> list[Jet]:
        lo = [c.map(lambda x: x.restrict(min(x.order, o + 2 * (m - k)))) for k, c in enumerate(coeffs)]
        tan, rr = _ricci_equations(lo + [h], n, o + 2 * m, m)
        eqs = [_trace(ginv, tan, o)] if trace_only else [tan[i][j] for i, j in pairs]
        if rr is not None:
            eqs.append(rr)
        return eqs

    nunk = 1 if trace_only else len(pairs)
    # linear part sampled at low x-order
    p = min(probe_order, q)
    r0 = residual(unknowns_to_h([xch.zero(p)] * nunk, p), p)
    cols = []
    for u in range(nunk):
        ru = residual(unknowns_to_h([xch.const(1 if k == u else 0, p) for k in range(nunk)], p), p)
        cols.append([a - b for a, b in zip(ru, r0)])
    L = [[cols[u][row] for u in range(nunk)] for row in range(len(r0))]
    sel = _independent_rows([[x.eval0() for x in row] for row in L])
    if len(sel) < nunk:
        raise SingularSolve(f"linearised Ricci condition at rho^{m - 1} has rank {len(sel)} < {nunk}")
    B = jet_matrix_inverse([L[r] for r in sel])

    vals = [xch.zero(q)] * nunk
    iters = 0
    while True:
        h = unknowns_to_h(vals, q)
        r = residual(h, q)
        iters += 1
        if all(r[s].is_zero() for s in sel):
            break
        if iters > q + 2:
            raise SingularSolve(f"defect correction at rho^{m - 1} did not converge")
        rs = [r[s] for s in sel]
        delta = [jet_dot(((B[a][b], rs[b]) for b in range(nunk)), xch.nvars) for a in range(nunk)]
        vals = [v - (_pad(d, q) if d.order < q else d.restrict(q)) for v, d in zip(vals, delta)]
    rest = [k for k in range(len(r)) if k not in sel and not r[k].is_zero()]
    if rest:
        raise SingularSolve(f"Ricci equations at rho^{m - 1} are inconsistent (rows {rest})")
    log[m] = {"evaluations": iters + nunk + 1, "probe_order": p, "trace_only": trace_only,
              "equations": len(r), "selected": sel}
    return h


def trace_free_part(A: TensorJet, g: TensorJet, ginv: TensorJet, order: int) -> TensorJet:
    n = g.chart.dim
    rows = [[A.comps[i, j].restrict(order) for j in range(n)] for i in range(n)]
    tr = _trace(ginv, rows, order).scale(Fraction(1, n))
    return _sym_tensor(g.chart, [[rows[i][j] - tr * g.comps[i, j].restrict(order) for j in range(n)]
                                 for i in range(n)])


def build_ambient(g: TensorJet, n: int, signature: tuple[int, int] | None = None,
                  target_rho_order: int | None = None, even_ambiguity_choice: TensorJet | None = None,
                  order: int | None = None, probe_order: int = 1) -> AmbientMetricJet:
    """Solve for ``g^(1..M)`` and assemble ``g~`` at weighted ``order``.

    ``M`` is ``target_rho_order`` for odd ``n`` and ``n/2`` for even ``n``
    (where ``target_rho_order`` must be at least ``n/2``).  ``order`` defaults
    to the largest honest value ``min(g.order, 2M + 1)``.
    """
    if g.chart.dim != n:
        raise ValueError(f"metric lives on a {g.chart.dim}-dimensional chart, expected n={n}")
    if n < 3:
        raise ValueError("ambient construction needs n >= 3")
    if signature is None:
        signature = (n, 0)
    if not g.is_symmetric():
        raise ValueError("metric is not symmetric")
    ginv = metric_inverse(g)
    even = n % 2 == 0
    if even:
        if target_rho_order is not None and target_rho_order < n // 2:
            raise ValueError(f"even n={n} needs target_rho_order >= {n // 2}")
        M = n // 2
    else:
        M = target_rho_order if target_rho_order is not None else 1
        if M < 1:
            raise ValueError("target_rho_order must be positive")
    W = min(g.order, 2 * M + 1) if order is None else order
    if W > 2 * M + 1:
        raise ValueError(f"weighted order {W} would need g^({M + 1}), beyond the solve depth {M}")
    if g.order < W:
        raise ValueError(f"metric known to x-order {g.order}; weighted order {W} needs x-order {W}")
    if W < 2 * M:
        raise ValueError(f"weighted order {W} cannot determine g^({M}); need at least {2 * M}")

    coeffs = [_restrict_x(g, W)]
    log: dict = {}
    amb_tf = None
    for m in range(1, M + 1):
        last_even = even and m == n // 2
        fixed = None
        if last_even and even_ambiguity_choice is not None:
            amb_tf = trace_free_part(even_ambiguity_choice, g, ginv, W - 2 * m)
            fixed = amb_tf
        h = _solve_step(coeffs, g, ginv, n, W, m, last_even, fixed, probe_order, log)
        coeffs.append(h)
    gt = assemble(coeffs, n, W)
    return AmbientMetricJet(n=n, signature=tuple(signature), g=g, g_rho_coeffs=coeffs, order=W,
                            solve_depth=M, assembled=gt, ambiguity=amb_tf,
                            diagnostics={"steps": log}, t_exponents=NORMAL_FORM_T_EXPONENTS(n))


# -- checks ----------------------------------------------------------------------


def check_straightness(amb: AmbientMetricJet) -> CheckResult:
    """``∇~_A T^B = δ_A^B`` with ``T = t ∂_t``."""
    ch = amb.chart
    N = ch.dim
    hi = amb.order + _MARGIN
    comps = np.empty((N,), dtype=object)
    for a in range(N):
        comps[a] = ch.const(1 if a == T else 0, hi)
    Tv = TensorJet(ch, 1, 0, comps, grade=0)
    dT = covariant_derivative(Tv, amb.Gamma)
    bad = []
    for b in range(N):
        for a in range(N):
            r = dT.comps[b, a] - ch.const(1 if a == b else 0, dT.comps[b, a].order)
            if not r.is_zero():
                bad.append((b, a))
    return CheckResult("straightness", not bad, f"order {dT.order}", bad)


def check_initial(amb: AmbientMetricJet, g: TensorJet | None = None) -> CheckResult:
    """Pull-back to ``rho = 0, t = 1``: tangential block equals ``g``, ``t``-row vanishes."""
    g = amb.g if g is None else g
    n = amb.n
    bad = []
    gt = amb.assembled.comps
    for a in range(1, n + 2):
        for b in range(a, n + 2):
            c = rho_coeff(gt[a, b], 0)
            if a == T:
                if not c.is_zero():
                    bad.append((a, b))
                continue
            ref = g.comps[a - 2, b - 2]
            o = min(c.order, ref.order)
            if not c.restrict(o) == ref.restrict(o):
                bad.append((a, b))
    return CheckResult("initial", not bad, "", bad)


def _expand_t(f: Jet, p: int, order: int) -> dict:
    """Coefficients of ``(1+s)^p f`` in variables ``(rho, s, x...)`` up to ``order`` in ``s``."""
    out = {}
    binom = [Fraction(1)]
    for k in range(1, order + 1):
        binom.append(binom[-1] * (p - k + 1) / k)
    for e, c in f.to_dict().items():
        for k, b in enumerate(binom):
            if b:
                out[(e[0], k) + e[1:]] = out.get((e[0], k) + e[1:], 0) + c * b
    return out


def check_homogeneity(amb: AmbientMetricJet, t_exponents=None) -> CheckResult:
    """``L_T g~ = 2 g~`` in the honest chart ``(rho, s = t - 1, x)``.

    Components are rebuilt as ``t^e f`` from the recorded exponents ``e``
    (the normal form's explicit powers of ``t``) and expanded around ``t = 1``.
    """
    n = amb.n
    N = n + 2
    e = amb.t_exponents if t_exponents is None else np.asarray(t_exponents)
    W = amb.order
    ch = Chart(["rho", "s"] + [f"x{i + 1}" for i in range(n)], [2, 1] + [1] * n)
    G = np.empty((N, N), dtype=object)
    for a in range(N):
        for b in range(N):
            f = amb.assembled.comps[a, b].restrict(W)
            G[a, b] = Jet.from_dict(_expand_t(f, int(e[a, b]), W), ch.nvars, W, ch.jet_weights)
    # T = (1+s) ∂_s
    Tvec = [ch.zero(W + 1) for _ in range(N)]
    Tvec[T] = ch.const(1, W + 1) + ch.coord(T, W + 1)
    dT = [[ch.d(Tvec[c], a) for c in range(N)] for a in range(N)]
    bad = []
    for a in range(N):
        for b in range(a, N):
            lie = Tvec[T] * ch.d(G[a, b], T)
            for c in range(N):
                if not dT[a][c].is_zero():
                    lie = lie + G[c, b] * dT[a][c]
                if not dT[b][c].is_zero():
                    lie = lie + G[a, c] * dT[b][c]
            if not (lie - G[a, b].scale(2)).is_zero():
                bad.append((a, b))
    return CheckResult("homogeneity", not bad, f"order {W - 1} in (rho, s, x)", bad)


def check_T_form(amb: AmbientMetricJet) -> CheckResult:
    """``g~(T, .) = t^2 drho + 2 rho t dt`` (slice values ``(1, 2 rho, 0...)``)."""
    ch = amb.chart
    gt = amb.assembled.comps
    bad = []
    for a in range(ch.dim):
        o = gt[T, a].order
        w = {RHO: ch.const(1, o), T: ch.coord(RHO, max(o, 2)).scale(2).restrict(o)}.get(a, ch.zero(o))
        if not gt[T, a] == w:
            bad.append(a)
    return CheckResult("T_form", not bad, "", bad)


def ricci_residual(amb: AmbientMetricJet, up_to_order: int) -> list[ResidualCoefficient]:
    limit = amb.solve_depth - 1
    if up_to_order > limit:
        raise ValueError(f"requested rho^{up_to_order} but the solve only controls up to rho^{limit}")
    ric = amb.ricci
    N = amb.n + 2
    out = []
    for k in range(up_to_order + 1):
        comps = {}
        for a in range(N):
            for b in range(a, N):
                comps[(a, b)] = rho_coeff(ric[a, b], k)
        out.append(ResidualCoefficient(k, comps, amb.n))
    return out


def classify_residuals(amb: AmbientMetricJet) -> dict:
    """Odd ``n``: every determined coefficient through ``M-1`` vanishes.
    Even ``n``: zero below ``n/2-1``; at ``n/2-1`` the ``t``-components vanish
    and the ``x``-block is trace-free."""
    M = amb.solve_depth
    top = M - 1
    res = ricci_residual(amb, top)
    info = {"orders": []}
    ok = True
    for rc in res:
        entry = {"k": rc.k, "determined": len(rc.determined()), "total": len(rc.comps),
                 "tangential_determined": rc.tangential_determined, "zero": rc.is_zero}
        if amb.parity == "even" and rc.k == amb.n // 2 - 1:
            tan = rc.tangential()
            order = min(c.order for row in tan for c in row)
            trace = _trace(metric_inverse(amb.g).restrict(order), tan, order)
            entry["t_components_zero"] = rc.t_components_zero()
            entry["tracefree"] = trace.is_zero()
            good = rc.tangential_determined and entry["t_components_zero"] and entry["tracefree"]
        else:
            good = rc.tangential_determined and rc.is_zero
        entry["passed"] = good
        ok = ok and good
        info["orders"].append(entry)
    info["passed"] = ok
    return info


def obstruction(amb: AmbientMetricJet) -> ObstructionReport:
    if amb.parity != "even":
        raise ValueError("the obstruction tensor is only defined for even n")
    k = amb.n // 2 - 1
    rc = ricci_residual(amb, k)[k]
    tan = rc.tangential()
    order = min(c.order for row in tan for c in row)
    xch = amb.g.chart
    O = _sym_tensor(xch, [[c.restrict(order) for c in row] for row in tan])
    trace = _trace(metric_inverse(amb.g).restrict(order), tan, order)
    return ObstructionReport(k, O, trace.is_zero(), rc.t_components_zero())
