"""Infinitesimal holonomy algebras as exact spans of iterated curvature derivatives.

Everything is expressed in the homogeneous frame

    zeta_0 = d/drho,  zeta_1 = T = t d/dt,  zeta_{1+i} = d/dx^i

whose frame components of degree-0 tensors do not depend on ``t``; on the
slice ``t = 1`` they coincide with the stored coordinate slice values.  A
generator for the multi-index ``(A1, ..., Ak)`` is

    nabla_{zeta_Ak} ... nabla_{zeta_A3} ( R~(zeta_A1, zeta_A2) )   at z,

an endomorphism of the fibre written as an (n+2)x(n+2) matrix ``E^P_Q``.
Derivatives of endomorphism-valued functions use the frame connection
matrices ``omega_A`` with ``(omega_A)^P_Q = <zeta^P, nabla_{zeta_A} zeta_Q>``:
``nabla_A E = zeta_A(E) + [omega_A, E]``.

The tractor side uses the same engine with the connection of a scale of
the conformal class (matrices built from ``g``, its Schouten tensor and its
Levi-Civita connection), which never touches the ambient metric.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .ambient import RHO, T, AmbientMetricJet
from .exactla import RowSpace, flatten, matmul, nullspace, transpose, unflatten
from .jetcalc import Jet, jet_dot
from .tensorgeo import OrderExhausted, TensorJet, christoffel, covariant_derivative, metric_inverse, schouten

__all__ = [
    "AmbientFrame",
    "Endomorphism",
    "HolonomySpan",
    "ambient_frame",
    "transverse_count_filter",
    "span_accumulate",
    "ambient_holonomy",
    "tractor_holonomy",
    "compare_spans",
    "commutator_closure_check",
    "skewness_check",
    "ambient_connection_matrices",
    "scale_connection_matrices",
    "curvature_matrices",
    "iterated_curvature",
    "SpanComparison",
    "T_slot_report",
    "common_kernel",
    "bracket",
]

Mat = list[list[Jet]]


@dataclass
class AmbientFrame:
    n: int
    vectors: list[TensorJet]
    transverse: tuple[int, ...] = (0,)

    def lie_T_zero(self) -> bool:
        """``[T, zeta_A] = 0``: with slice values, ``(L_T V)^b = p_b V^b - V^t delta^b_t``."""
        for v in self.vectors:
            for b in range(self.n + 2):
                p = v.tpower((b,))
                lie = v.comps[b].scale(p)
                if b == T:
                    lie = lie - v.comps[T]
                if not lie.is_zero():
                    return False
        return True


def ambient_frame(amb: AmbientMetricJet) -> AmbientFrame:
    ch = amb.chart
    N = ch.dim
    hi = amb.order
    vecs = []
    for A in range(N):
        comps = np.empty((N,), dtype=object)
        for b in range(N):
            comps[b] = ch.const(1 if b == A else 0, hi)
        # zeta_1 = t d/dt has slice component 1 at grade 0; the others are coordinate fields
        vecs.append(TensorJet(ch, 1, 0, comps, grade=0))
    return AmbientFrame(amb.n, vecs)


@dataclass(frozen=True)
class Endomorphism:
    matrix: tuple
    provenance: tuple

    def rows(self) -> list[list[Fraction]]:
        return [list(r) for r in self.matrix]


@dataclass
class HolonomySpan:
    size: int
    space: RowSpace
    history: dict = field(default_factory=dict)
    generator_log: list = field(default_factory=list)
    k_max: int = 0
    budget_exhausted_at: int | None = None
    budget_detail: str = ""

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def basis(self) -> list[list[list[Fraction]]]:
        return [unflatten(v, self.size) for v in self.space.basis]

    @property
    def history_list(self) -> list[int]:
        return [self.history[k] for k in sorted(self.history)]

    def monotone(self) -> bool:
        h = self.history_list
        return all(a <= b for a, b in zip(h, h[1:]))

    def stabilized(self, closure: bool | None = None) -> bool:
        """dim unchanged between the last two completed orders and closed under brackets."""
        h = self.history_list
        if len(h) < 2 or h[-1] != h[-2]:
            return False
        return commutator_closure_check(self) if closure is None else closure


def transverse_count_filter(multi: Sequence[int], n: int, parity: str | None = None) -> bool:
    parity = parity or ("even" if n % 2 == 0 else "odd")
    if parity == "odd":
        return True
    return sum(1 for a in multi if a == 0) <= n // 2 - 2


def span_accumulate(endos: Sequence[Endomorphism], size: int | None = None) -> HolonomySpan:
    if size is None:
        if not endos:
            raise ValueError("matrix size needed for an empty generator list")
        size = len(endos[0].matrix)
    span = HolonomySpan(size, RowSpace(size * size))
    for e in endos:
        if len(e.matrix) != size:
            raise ValueError("inconsistent matrix sizes")
        grew = span.space.add(flatten(e.matrix))
        span.generator_log.append((tuple(e.provenance), grew))
        k = len(e.provenance)
        span.history[k] = span.dim
    # fill orders with no generators so the history is contiguous
    if span.history:
        ks = sorted(span.history)
        last = 0
        for k in range(ks[0], ks[-1] + 1):
            last = span.history.get(k, last)
            span.history[k] = last
    return span


# -- connection and curvature matrices ---------------------------------------------


def ambient_connection_matrices(amb: AmbientMetricJet) -> dict[int, Mat]:
    """``omega_A`` in the homogeneous frame (slice values)."""
    G = amb.Gamma.comps
    N = amb.n + 2
    out = {}
    for A in range(N):
        m = [[G[P, A, Q] for Q in range(N)] for P in range(N)]
        if A == T:
            # zeta_1(t) d/dt = zeta_1
            m[T][T] = m[T][T] + 1
        out[A] = m
    return out


def scale_connection_matrices(g: TensorJet, order: int | None = None) -> dict[int, Mat]:
    """Tractor connection of the scale ``g`` on ``(Y-slot, X-slot, Z-slots)``.

    Indices follow the frame: 0 pairs with ``zeta_0``, 1 with ``T``, ``2+b`` with ``d/dx^b``.
    Entries: ``(w_a)^{b}_{T} = delta``, ``(w_a)^{rho}_{b} = -g_ab``, ``(w_a)^{T}_{b} = -P_ab``,
    ``(w_a)^{c}_{b} = Gamma^c_ab``, ``(w_a)^{b}_{rho} = P_a^b``.
    """
    ch = g.chart
    n = ch.dim
    ginv = metric_inverse(g)
    Gam = christoffel(g, ginv)
    P = schouten(g, ginv).P
    Pmix = [[jet_dot(((P.comps[a, c], ginv.comps[c, b]) for c in range(n)), n) for b in range(n)]
            for a in range(n)]
    hi = g.order
    out = {}
    for a in range(n):
        m = [[ch.zero(hi) for _ in range(n + 2)] for _ in range(n + 2)]
        for b in range(n):
            m[2 + b][T] = ch.const(1 if a == b else 0, hi)
            m[RHO][2 + b] = -g.comps[a, b]
            m[T][2 + b] = -P.comps[a, b]
            m[2 + b][RHO] = Pmix[a][b]
            for c in range(n):
                m[2 + c][2 + b] = Gam.comps[c, a, b]
        out[a] = m
    return out


def _mat_bracket_deriv(E: Mat, w: Mat, dE: Mat | None, nv: int, weights) -> Mat:
    N = len(E)
    out = []
    for P in range(N):
        row = []
        for Q in range(N):
            pairs = []
            for R in range(N):
                pairs.append((w[P][R], E[R][Q]))
                pairs.append((-E[P][R], w[R][Q]))
            extra = (dE[P][Q],) if dE is not None else ()
            row.append(jet_dot(pairs, nv, weights, extra))
        out.append(row)
    return out


def _restrict(m: Mat, o: int) -> Mat:
    return [[x.restrict(o) if x.order > o else x for x in row] for row in m]


def curvature_matrices(omega: dict[int, Mat], d: Callable[[Jet, int], Jet], dirs: Sequence[int],
                       nv: int, weights) -> dict[tuple[int, int], Mat]:
    """``E_ab = d_a w_b - d_b w_a + [w_a, w_b]`` for ``a < b`` in ``dirs``."""
    out = {}
    for a, b in itertools.combinations(dirs, 2):
        wa, wb = omega[a], omega[b]
        N = len(wa)
        dE = [[d(wb[P][Q], a) - d(wa[P][Q], b) for Q in range(N)] for P in range(N)]
        out[(a, b)] = _mat_bracket_deriv(wb, wa, dE, nv, weights)
    return out


def _eval(m: Mat) -> tuple:
    return tuple(tuple(x.eval0() for x in row) for row in m)


def _is_zero(m: Mat) -> bool:
    return all(x.is_zero() for row in m for x in row)


class _Engine:
    """Enumerates generators in canonical order for one connection."""

    def __init__(self, n: int, base: dict, omega: dict, d: Callable, weight: Callable[[int], int],
                 dirs: Sequence[int], nv: int, weights, zero_dirs: Sequence[int] = (),
                 allowed: Callable[[tuple], bool] | None = None):
        self.n = n
        self.base = base
        self.omega = omega
        self.d = d
        self.weight = weight
        self.dirs = list(dirs)
        self.nv = nv
        self.weights = weights
        self.zero_dirs = set(zero_dirs)  # directions whose derivative is identically zero
        self.parity = "even" if n % 2 == 0 else "odd"
        self.allowed = allowed or (lambda multi: transverse_count_filter(multi, n, self.parity))

    def _rem_need(self, multi: tuple, K: int) -> int:
        left = K - len(multi)
        if left <= 0:
            return 0
        ws = sorted((self.weight(a) for a in self.dirs if a not in self.zero_dirs), reverse=True)
        wmax = ws[0] if ws else 0
        if self.parity == "odd" or wmax <= 1:
            return left * wmax
        zmax = self.n // 2 - 2 - sum(1 for a in multi if a == 0)
        heavy = max(0, min(left, zmax))
        return heavy * wmax + (left - heavy)

    def run(self, K: int) -> Iterator[tuple[tuple, tuple | None, str]]:
        """Yield ``(multi, matrix_at_z or None, note)``; raises OrderExhausted at the first short level."""
        level = []
        for (a, b), E in self.base.items():
            multi = (a, b)
            if not self.allowed(multi):
                continue
            level.append((multi, E))
        level.sort(key=lambda t: t[0])
        for multi, E in level:
            yield multi, _eval(E), "zero" if _is_zero(E) else ""
        for k in range(3, K + 1):
            nxt = []
            for multi, E in level:
                if _is_zero(E):
                    # descendants of an identically vanishing section vanish
                    for A in self.dirs:
                        child = multi + (A,)
                        if self.allowed(child):
                            nxt.append((child, E))
                    continue
                for A in self.dirs:
                    child = multi + (A,)
                    if not self.allowed(child):
                        continue
                    if A in self.zero_dirs:
                        nxt.append((child, _zero_like(E)))
                        continue
                    need = self._rem_need(child, K)
                    src = _restrict(E, need + self.weight(A))
                    for row in src:
                        for x in row:
                            if x.order < self.weight(A):
                                raise OrderExhausted(f"generator {child} needs more jet order")
                    w = _restrict(self.omega[A], need)
                    dE = [[self.d(x, A) for x in row] for row in src]
                    nxt.append((child, _mat_bracket_deriv(src, w, dE, self.nv, self.weights)))
            level = nxt
            for multi, E in level:
                yield multi, _eval(E), "zero" if _is_zero(E) else ""


def _zero_like(E: Mat) -> Mat:
    return [[Jet.zero(x.nvars, x.order, x.weights) for x in row] for row in E]


def _collect(engine: _Engine, K: int, size: int, label_map=None) -> HolonomySpan:
    span = HolonomySpan(size, RowSpace(size * size), k_max=K)
    completed = {}
    try:
        for multi, mat, note in engine.run(K):
            label = tuple(label_map[a] for a in multi) if label_map else multi
            grew = span.space.add(flatten(mat))
            span.generator_log.append((label, grew, note))
            completed[len(multi)] = span.dim
    except OrderExhausted as exc:
        k = max(completed) + 1 if completed else 2
        span.budget_exhausted_at = k
        span.budget_detail = str(exc)
        completed.pop(k, None)
    span.history = {k: completed[k] for k in sorted(completed) if span.budget_exhausted_at is None
                    or k < span.budget_exhausted_at}
    return span


def _ambient_engine(amb: AmbientMetricJet, skip_T: bool = True) -> _Engine:
    ch = amb.chart
    N = amb.n + 2
    R = amb.R.comps
    base = {}
    for A, B in itertools.combinations(range(N), 2):
        base[(A, B)] = [[R[P, Q, A, B] for Q in range(N)] for P in range(N)]
    omega = ambient_connection_matrices(amb)

    def d(f: Jet, A: int) -> Jet:
        return ch.d(f, A, 0)

    def weight(A: int) -> int:
        v = ch.var(A)
        return 0 if v is None else ch.jet_weights[v]

    return _Engine(amb.n, base, omega, d, weight, list(range(N)), ch.nvars, ch.jet_weights,
                   zero_dirs=(T,) if skip_T else ())


def ambient_holonomy(amb: AmbientMetricJet, K_max: int) -> HolonomySpan:
    """Span over all filtered multi-indices of length ``2..K_max``.

    Derivatives along ``T`` are recorded as zero: ``omega_T`` is the identity
    (checked by :func:`T_slot_report`) and frame components are ``t``-independent.
    """
    return _collect(_ambient_engine(amb), K_max, amb.n + 2)


def tractor_holonomy(amb: AmbientMetricJet, K_max: int, route: str = "scale") -> HolonomySpan:
    """Tangential multi-indices only.

    ``route="scale"`` differentiates the scale-form tractor curvature of ``g``
    (independent of the ambient metric); ``route="ambient"`` restricts the
    ambient engine to tangential directions along ``G``.
    """
    n = amb.n
    if route == "ambient":
        eng = _ambient_engine(amb)
        eng.dirs = list(range(2, n + 2))
        eng.base = {k: v for k, v in eng.base.items() if k[0] >= 2}
        return _collect(eng, K_max, n + 2)
    if route != "scale":
        raise ValueError(f"unknown route {route!r}")
    g = amb.g
    ch = g.chart
    omega = scale_connection_matrices(g)

    def d(f: Jet, a: int) -> Jet:
        return ch.d(f, a)

    base = curvature_matrices(omega, d, range(n), ch.nvars, ch.jet_weights)
    # x-chart directions are all tangential, so the transverse filter never applies
    eng = _Engine(n, base, omega, d, lambda a: 1, list(range(n)), ch.nvars, ch.jet_weights,
                  allowed=lambda multi: True)
    return _collect(eng, K_max, n + 2, label_map={a: a + 2 for a in range(n)})


def iterated_curvature(amb: AmbientMetricJet, multi: Sequence[int], form: str = "nested") -> Endomorphism:
    """A single generator, computed without the span machinery.

    ``form="nested"`` differentiates the section ``R~(zeta_A1, zeta_A2)``;
    ``form="tensor"`` contracts the tensor ``nabla~^(k-2) R~`` with the frame.
    The two differ by lower-order terms, so their spans agree level by level.
    """
    multi = tuple(multi)
    if len(multi) < 2:
        raise ValueError("need at least the two curvature slots")
    if not transverse_count_filter(multi, amb.n):
        raise ValueError(f"multi-index {multi} violates the transverse-count filter for n={amb.n}")
    if form == "tensor":
        D = _nabla_power(amb, len(multi) - 2)
        N = amb.n + 2
        return Endomorphism(tuple(tuple(D.comps[(P, Q) + multi].eval0() for Q in range(N)) for P in range(N)),
                            multi)
    if form != "nested":
        raise ValueError(f"unknown form {form!r}")
    eng = _ambient_engine(amb, skip_T=False)
    A1, A2 = multi[:2]
    sgn = 1
    if A1 > A2:
        A1, A2, sgn = A2, A1, -1
    N = amb.n + 2
    if A1 == A2:
        return Endomorphism(tuple(tuple(Fraction(0) for _ in range(N)) for _ in range(N)), multi)
    E = [[x.scale(sgn) for x in row] for row in eng.base[(A1, A2)]]
    for A in multi[2:]:
        if any(x.order < eng.weight(A) for row in E for x in row):
            raise OrderExhausted(f"generator {multi} needs more jet order")
        dE = [[eng.d(x, A) for x in row] for row in E]
        E = _mat_bracket_deriv(E, eng.omega[A], dE, eng.nv, eng.weights)
    return Endomorphism(_eval(E), multi)


def _nabla_power(amb: AmbientMetricJet, k: int) -> TensorJet:
    """``nabla~^k R~`` with derivative indices appended (outermost last), cached."""
    key = ("nablaR", k)
    if key not in amb._cache:
        amb._cache[key] = amb.R if k == 0 else covariant_derivative(_nabla_power(amb, k - 1), amb.Gamma)
    return amb._cache[key]


# -- span comparisons and structure -------------------------------------------------


@dataclass
class SpanComparison:
    verdict: str
    dims: tuple[int, int]
    witness: list | None = None


def compare_spans(a: HolonomySpan, b: HolonomySpan) -> SpanComparison:
    if a.size != b.size:
        raise ValueError("spans of different matrix sizes")
    a_in_b = all(b.space.contains(v) for v in a.space.basis)
    b_in_a = all(a.space.contains(v) for v in b.space.basis)
    dims = (a.dim, b.dim)
    if a_in_b and b_in_a:
        return SpanComparison("equal", dims)
    if a_in_b:
        w = next(v for v in b.space.basis if not a.space.contains(v))
        return SpanComparison("a_in_b", dims, unflatten(w, a.size))
    if b_in_a:
        w = next(v for v in a.space.basis if not b.space.contains(v))
        return SpanComparison("b_in_a", dims, unflatten(w, a.size))
    w = next(v for v in a.space.basis if not b.space.contains(v))
    return SpanComparison("incomparable", dims, unflatten(w, a.size))


def bracket(x, y):
    xy, yx = matmul(x, y), matmul(y, x)
    return [[p - q for p, q in zip(r, s)] for r, s in zip(xy, yx)]


def commutator_closure_check(s: HolonomySpan) -> bool:
    B = s.basis
    for i in range(len(B)):
        for j in range(i + 1, len(B)):
            if not s.space.contains(flatten(bracket(B[i], B[j]))):
                return False
    return True


def skewness_check(s: HolonomySpan | Sequence, h) -> bool:
    mats = s.basis if isinstance(s, HolonomySpan) else list(s)
    for E in mats:
        a = matmul(transpose(E), h)
        b = matmul(h, E)
        if any(x + y != 0 for r1, r2 in zip(a, b) for x, y in zip(r1, r2)):
            return False
    return True


def common_kernel(s: HolonomySpan) -> list[list[Fraction]]:
    """Vectors annihilated by every element of the span."""
    rows = [r for E in s.basis for r in E]
    return nullspace(rows, s.size)


def T_slot_report(amb: AmbientMetricJet) -> dict:
    """``R~(T, .) = 0`` as jets, ``omega_T = Id`` as jets, ``R~(., .)T = 0`` as jets."""
    N = amb.n + 2
    R = amb.R.comps
    curv_slot = all(R[P, Q, T, B].is_zero() for P in range(N) for Q in range(N) for B in range(N))
    endo_col = all(R[P, T, A, B].is_zero() for P in range(N) for A in range(N) for B in range(N))
    om = ambient_connection_matrices(amb)[T]
    ident = all((om[P][Q] - (1 if P == Q else 0)).is_zero() for P in range(N) for Q in range(N))
    return {"curvature_slot_zero": curv_slot, "endomorphism_column_zero": endo_col,
            "omega_T_identity": ident, "passed": curv_slot and endo_col and ident}
