"""Scenario files, the run pipeline and report emission."""

from __future__ import annotations

import json
import random
import re
import time
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

import flint

from .ambient import (
    AmbientMetricJet,
    SingularSolve,
    assemble,
    build_ambient,
    check_homogeneity,
    check_initial,
    check_straightness,
    check_T_form,
    classify_residuals,
    obstruction,
    ricci_residual,
)
from .holonomy import (
    T_slot_report,
    ambient_holonomy,
    commutator_closure_check,
    compare_spans,
    skewness_check,
    tractor_holonomy,
)
from .exactla import RowSpace
from .jetcalc import Jet
from .metrics import BUILTINS, builtin_metric, x_chart
from .tensorgeo import OrderExhausted, TensorJet, bach, metric_from_dict, metric_inverse, schouten
from .tractor import (
    ScaleData,
    TractorJet,
    connection_agreement,
    curvature_commutator_check,
    density_extension,
    einstein_tractor,
    gp_curvature_identity_check,
    metric_compatibility,
    parallel_tractor_detect,
    tractor_D_ambient,
    tractor_D_scale,
    tractor_metric,
    _signature,
)

__all__ = [
    "ScenarioConfig",
    "ConfigError",
    "ScenarioAborted",
    "Report",
    "CHECKS",
    "load_scenario",
    "parse_scenario",
    "run_scenario",
    "emit_report",
    "report_to_json",
    "builtin_scenarios",
    "builtin_metric",
]

CHECKS = (
    "straightness",
    "initial",
    "homogeneity",
    "T_form",
    "ricci_conditions",
    "g1_schouten",
    "obstruction_bach",
    "span_equality",
    "tractor_in_ambient",
    "skewness",
    "dim_bound",
    "history_monotone",
    "commutator_closure",
    "T_slot",
    "connection_agreement",
    "metric_compatibility",
    "curvature_commutator",
    "tractor_metric_signature",
    "D_operator",
    "gp_identity",
    "parallel_tractor",
    "expectations",
)

NEGATIVE_CONTROLS = ("t_exponent", "rho_tail")


class ConfigError(ValueError):
    """Scenario file violates the format or an invariant."""


class ScenarioAborted(RuntimeError):
    """The pipeline could not continue (degenerate linear system in the solve)."""


@dataclass
class ScenarioConfig:
    name: str
    n: int
    signature: tuple[int, int]
    metric: dict
    x_jet_order: int
    rho_solve_order: int
    K_max: int
    even_ambiguity: Any = "zero"
    checks: list = field(default_factory=lambda: list(CHECKS))
    output: str | None = None
    d_samples: int = 20
    d_weights: list = field(default_factory=list)
    d_seed: int = 0
    expect: dict = field(default_factory=dict)

    @property
    def weighted_order(self) -> int:
        M = self.solve_depth
        return min(self.x_jet_order, 2 * M + 1)

    @property
    def solve_depth(self) -> int:
        return self.n // 2 if self.n % 2 == 0 else self.rho_solve_order

    def echo(self) -> dict:
        d = asdict(self)
        d["signature"] = list(self.signature)
        d["d_weights"] = [_q(w) for w in self.d_weights]
        d["even_ambiguity"] = self.even_ambiguity
        return d


# -- rationals and parsing ----------------------------------------------------------


_RATIONAL = re.compile(r"[+-]?\d+(/\d+)?")


def _rat(x, where: str) -> Fraction:
    if isinstance(x, bool):
        raise ConfigError(f"{where}: expected a rational, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        if not _RATIONAL.fullmatch(x.strip()):
            raise ConfigError(f"{where}: rationals are written 'p/q' or 'p', got {x!r}")
        try:
            return Fraction(x.strip())
        except ZeroDivisionError:
            raise ConfigError(f"{where}: zero denominator in {x!r}") from None
    raise ConfigError(f"{where}: rationals are integers or 'p/q' strings, got {x!r}")


def _q(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _ints(key: str, n: int, where: str, size: int) -> tuple[int, ...]:
    try:
        parts = tuple(int(p) for p in key.split(","))
    except ValueError:
        raise ConfigError(f"{where}: bad index {key!r}") from None
    if len(parts) != size or any(p < 0 for p in parts):
        raise ConfigError(f"{where}: index {key!r} must be {size} non-negative integers")
    return parts


def _coeff_table(table: dict, n: int, where: str) -> dict:
    """``{"i,j": {"e1,...,en": "p/q"}}`` with 0-based component indices."""
    if not isinstance(table, dict):
        raise ConfigError(f"{where}: expected an object keyed by component")
    out = {}
    for comp, monos in table.items():
        i, j = _ints(comp, n, f"{where}[{comp}]", 2)
        if i >= n or j >= n:
            raise ConfigError(f"{where}: component {comp!r} out of range for n={n}")
        if not isinstance(monos, dict):
            raise ConfigError(f"{where}[{comp}]: expected an object keyed by multi-index")
        key = (min(i, j), max(i, j))
        if key in out:
            raise ConfigError(f"{where}: component {key} given twice")
        out[key] = {_ints(m, n, f"{where}[{comp}]", n): _rat(c, f"{where}[{comp}][{m}]") for m, c in monos.items()}
    return out


def _table_to_tensor(table: dict, n: int, order: int) -> TensorJet:
    return metric_from_dict(x_chart(n), table, order)


def parse_scenario(data: dict, source: str = "<scenario>") -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be an object")
    known = {"name", "n", "signature", "metric", "x_jet_order", "rho_solve_order", "K_max", "even_ambiguity",
             "checks", "output", "d_operator", "expect"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"{source}: unknown fields {sorted(extra)}")
    for req in ("name", "n", "metric"):
        if req not in data:
            raise ConfigError(f"{source}: missing required field {req!r}")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 3:
        raise ConfigError(f"{source}: n must be an integer >= 3, got {n!r}")
    sig = tuple(data.get("signature", (n, 0)))
    if len(sig) != 2 or any(not isinstance(s, int) or s < 0 for s in sig):
        raise ConfigError(f"{source}: signature must be two non-negative integers")
    if sig[0] + sig[1] != n:
        raise ConfigError(f"{source}: signature p+q = {sig[0] + sig[1]} but n = {n}")
    K = data.get("K_max", 4)
    if not isinstance(K, int) or K < 2:
        raise ConfigError(f"{source}: K_max must be an integer >= 2")
    even = n % 2 == 0
    M = data.get("rho_solve_order", n // 2 if even else K)
    if not isinstance(M, int) or M < 1:
        raise ConfigError(f"{source}: rho_solve_order must be a positive integer")
    if even and M < n // 2:
        raise ConfigError(f"{source}: even n={n} requires rho_solve_order >= {n // 2}, got {M}")
    depth = n // 2 if even else M
    xo = data.get("x_jet_order", 2 * depth + 1 if even else 2 * depth)
    if not isinstance(xo, int) or xo < 2 * depth:
        raise ConfigError(f"{source}: x_jet_order must be an integer >= {2 * depth} to determine g^({depth})")

    metric = data["metric"]
    if not isinstance(metric, dict) or len({"builtin", "inline"} & set(metric)) != 1:
        raise ConfigError(f"{source}: metric needs exactly one of 'builtin' or 'inline'")
    if "builtin" in metric:
        if metric["builtin"] not in BUILTINS + ("einstein_product",):
            raise ConfigError(f"{source}: unknown builtin metric {metric['builtin']!r}")
        params = metric.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError(f"{source}: metric params must be an object")
        metric = {"builtin": metric["builtin"], "params": dict(params)}
        try:
            g = builtin_metric(metric["builtin"], n, metric["params"], 0, sig)
        except ValueError as exc:
            raise ConfigError(f"{source}: {exc}") from None
    else:
        table = _coeff_table(metric["inline"], n, f"{source}: metric.inline")
        metric = {"inline": {f"{i},{j}": {",".join(map(str, e)): _q(c) for e, c in sorted(m.items())}
                             for (i, j), m in sorted(table.items())}}
        g = _table_to_tensor(table, n, 0)
    g0 = [[g.comps[i, j].eval0() for j in range(n)] for i in range(n)]
    if _det(g0) == 0:
        raise ConfigError(f"{source}: metric is degenerate at the base point")
    if _signature(g0) != sig:
        raise ConfigError(f"{source}: metric at the base point has signature {_signature(g0)}, declared {sig}")

    amb = data.get("even_ambiguity", "zero")
    if amb != "zero":
        if not even:
            raise ConfigError(f"{source}: even_ambiguity is only meaningful for even n")
        if not isinstance(amb, dict) or set(amb) != {"inline"}:
            raise ConfigError(f"{source}: even_ambiguity must be 'zero' or {{'inline': table}}")
        table = _coeff_table(amb["inline"], n, f"{source}: even_ambiguity.inline")
        amb = {"inline": {f"{i},{j}": {",".join(map(str, e)): _q(c) for e, c in sorted(m.items())}
                          for (i, j), m in sorted(table.items())}}

    checks = data.get("checks", list(CHECKS))
    if not isinstance(checks, list) or any(c not in CHECKS for c in checks):
        bad = [c for c in checks if c not in CHECKS] if isinstance(checks, list) else checks
        raise ConfigError(f"{source}: unknown checks {bad}")
    if len(set(checks)) != len(checks):
        raise ConfigError(f"{source}: duplicate check names")
    dop = data.get("d_operator", {})
    if not isinstance(dop, dict) or set(dop) - {"samples", "weights", "seed"}:
        raise ConfigError(f"{source}: d_operator takes samples, weights, seed")
    weights = [_rat(w, f"{source}: d_operator.weights") for w in dop.get("weights", ["0", "1", "-1", "1/2"])]
    expect = data.get("expect", {})
    if not isinstance(expect, dict) or set(expect) - {"dim", "stabilized", "einstein"}:
        raise ConfigError(f"{source}: expect takes dim, stabilized, einstein")
    return ScenarioConfig(
        name=str(data["name"]), n=n, signature=sig, metric=metric, x_jet_order=xo, rho_solve_order=M, K_max=K,
        even_ambiguity=amb, checks=list(checks), output=data.get("output"),
        d_samples=int(dop.get("samples", 20)), d_weights=weights, d_seed=int(dop.get("seed", 0)),
        expect=dict(expect),
    )


def _det(m) -> Fraction:
    return Fraction(str(flint.fmpq_mat([[flint.fmpq(x.numerator, x.denominator) for x in r] for r in m]).det()))


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error at line {exc.lineno}: {exc.msg}") from None
    return parse_scenario(data, str(path))


def builtin_scenarios() -> list[tuple[str, ScenarioConfig]]:
    """Shipped scenario files, sorted by file name."""
    root = resources.files("tractorlab") / "scenarios"
    out = []
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".json"):
            out.append((entry.name, parse_scenario(json.loads(entry.read_text()), entry.name)))
    return out


def scenario_metric(cfg: ScenarioConfig) -> TensorJet:
    if "builtin" in cfg.metric:
        return builtin_metric(cfg.metric["builtin"], cfg.n, cfg.metric["params"], cfg.x_jet_order, cfg.signature)
    table = _coeff_table(cfg.metric["inline"], cfg.n, "metric.inline")
    return _table_to_tensor(table, cfg.n, cfg.x_jet_order)


def _ambiguity_tensor(cfg: ScenarioConfig) -> TensorJet | None:
    if cfg.even_ambiguity == "zero":
        return None
    table = _coeff_table(cfg.even_ambiguity["inline"], cfg.n, "even_ambiguity.inline")
    return _table_to_tensor(table, cfg.n, cfg.x_jet_order)


# -- report -----------------------------------------------------------------------


@dataclass
class Report:
    scenario: dict
    ambient: dict = field(default_factory=dict)
    holonomy: dict = field(default_factory=dict)
    comparison: dict = field(default_factory=dict)
    obstruction: dict | None = None
    parallel_tractors: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    def check(self, name: str) -> dict:
        return next(c for c in self.checks if c["name"] == name)

    @property
    def passed(self) -> bool:
        return all(c["status"] != "fail" for c in self.checks)

    def to_dict(self) -> dict:
        counts = {s: sum(1 for c in self.checks if c["status"] == s) for s in ("pass", "fail", "skipped")}
        return {
            "scenario": self.scenario,
            "ambient": self.ambient,
            "holonomy": self.holonomy,
            "comparison": self.comparison,
            "obstruction": self.obstruction,
            "parallel_tractors": self.parallel_tractors,
            "checks": self.checks,
            "summary": {"passed": self.passed, "counts": counts},
            "timing": self.timing,
        }


def report_to_json(report: Report | dict) -> str:
    d = report.to_dict() if isinstance(report, Report) else report
    return json.dumps(d, indent=2, sort_keys=False) + "\n"


def _jet_json(f: Jet) -> dict:
    return {"order": f.order, "terms": {",".join(map(str, e)): _q(c) for e, c in sorted(f.to_dict().items())}}


def _matrix_json(m) -> list:
    return [[_q(x) for x in row] for row in m]


def _span_json(s) -> dict:
    return {
        "dim": s.dim,
        "history": {str(k): v for k, v in sorted(s.history.items())},
        "k_max": s.k_max,
        "budget_exhausted_at": s.budget_exhausted_at,
        "budget_detail": s.budget_detail,
        "generators": len(s.generator_log),
    }


# -- pipeline ---------------------------------------------------------------------


class _Runner:
    def __init__(self, cfg: ScenarioConfig, report: Report):
        self.cfg = cfg
        self.report = report
        self.wanted = set(cfg.checks)

    def record(self, name: str, status: str, detail: str = "") -> None:
        if name not in self.wanted:
            return
        if any(c["name"] == name for c in self.report.checks):
            raise RuntimeError(f"check {name} recorded twice")
        self.report.checks.append({"name": name, "status": status, "detail": detail})

    def result(self, name: str, ok: bool, detail: str = "") -> None:
        self.record(name, "pass" if ok else "fail", detail)

    def skip(self, name: str, reason: str) -> None:
        self.record(name, "skipped", reason)

    def finish(self) -> None:
        # every requested check appears exactly once, in the canonical order
        seen = {c["name"] for c in self.report.checks}
        for name in self.cfg.checks:
            if name not in seen:
                self.skip(name, "not reached")
        order = {n: i for i, n in enumerate(CHECKS)}
        self.report.checks.sort(key=lambda c: order[c["name"]])


def _random_xjet(rng: random.Random, n: int, order: int, degree: int = 3) -> Jet:
    terms = {}
    for e in _monomials(n, min(degree, order)):
        a = rng.randint(-4, 4)
        if a:
            terms[e] = Fraction(a, rng.randint(1, 4))
    return Jet.from_dict(terms, n, order)


def _monomials(n: int, degree: int):
    if n == 0:
        yield ()
        return
    for k in range(degree + 1):
        for rest in _monomials(n - 1, degree - k):
            yield (k,) + rest


def _apply_negative_control(amb: AmbientMetricJet, kind: str) -> AmbientMetricJet:
    if kind == "t_exponent":
        e = amb.t_exponents.copy()
        e[2, 2] += 1
        amb.t_exponents = e
    elif kind == "rho_tail":
        # perturb the top rho-coefficient of one tangential entry
        M = amb.solve_depth
        top = amb.g_rho_coeffs[M]
        bump = top.map(lambda c: c.scale(0))
        c0 = bump.comps[0, 0]
        bump.comps[0, 0] = c0 + Jet.const(1, c0.nvars, c0.order, c0.weights)
        coeffs = list(amb.g_rho_coeffs[:M]) + [top + bump]
        amb.g_rho_coeffs = coeffs
        amb.assembled = assemble(coeffs, amb.n, amb.order)
        amb._cache.clear()
    else:
        raise ValueError(f"unknown negative control {kind!r}")
    return amb


def run_scenario(cfg: ScenarioConfig, *, kmax: int | None = None, _negative_control: str | None = None) -> Report:
    if kmax is not None:
        cfg = replace(cfg, K_max=kmax)
    report = Report(scenario=cfg.echo())
    run = _Runner(cfg, report)
    clock = {}
    t0 = time.perf_counter()

    def lap(key: str, start: float) -> None:
        clock[key] = round(time.perf_counter() - start, 3)

    n, K = cfg.n, cfg.K_max
    g = scenario_metric(cfg)
    ginv = metric_inverse(g)
    s = time.perf_counter()
    try:
        amb = build_ambient(g, n, cfg.signature, cfg.rho_solve_order, _ambiguity_tensor(cfg), order=cfg.weighted_order)
    except SingularSolve as exc:
        raise ScenarioAborted(f"{cfg.name}: ambient solve failed: {exc}") from exc
    lap("ambient_solve", s)
    if _negative_control:
        amb = _apply_negative_control(amb, _negative_control)

    # ambient conditions
    s = time.perf_counter()
    for name, fn in (("straightness", check_straightness), ("initial", check_initial),
                     ("homogeneity", check_homogeneity), ("T_form", check_T_form)):
        if name in run.wanted:
            r = fn(amb)
            run.result(name, r.passed, "" if r.passed else f"offending components {r.offending}")
    lap("ambient_checks", s)

    s = time.perf_counter()
    cls = classify_residuals(amb)
    residuals = []
    for rc in ricci_residual(amb, amb.solve_depth - 1):
        residuals.append({
            "k": rc.k,
            "components": {f"{a},{b}": (None if c is None else _jet_json(c)) for (a, b), c in sorted(rc.comps.items())},
        })
    report.ambient = {
        "weighted_order": amb.order,
        "solve_depth": amb.solve_depth,
        "steps": {str(m): v for m, v in sorted(amb.diagnostics["steps"].items())},
        "classification": cls,
        "residuals": residuals,
        "g_rho": [{str(f"{i},{j}"): _jet_json(c.comps[i, j]) for i in range(n) for j in range(i, n)}
                  for c in amb.g_rho_coeffs],
    }
    run.result("ricci_conditions", cls["passed"],
               "" if cls["passed"] else f"failing orders {[o['k'] for o in cls['orders'] if not o['passed']]}")

    P = schouten(g, ginv).P
    g1 = amb.g_rho_coeffs[1]
    bad = []
    for i in range(n):
        for j in range(i, n):
            a, b = g1.comps[i, j], P.comps[i, j].scale(2)
            o = min(a.order, b.order)
            if not a.restrict(o) == b.restrict(o):
                bad.append((i, j))
    run.result("g1_schouten", not bad, "" if not bad else f"components {bad}")

    if n % 2 == 0:
        ob = obstruction(amb)
        O = ob.residual_coefficient
        ob_json = {"order_checked": ob.order_checked, "tracefree": ob.is_tracefree, "tangential": ob.is_tangential,
                   "is_zero": O.is_zero(),
                   "tensor": {f"{i},{j}": _jet_json(O.comps[i, j]) for i in range(n) for j in range(i, n)}}
        if n == 4:
            const = _bach_constant(g, ginv, O)
            ob_json["bach_constant"] = None if const is None else const[0]
            ob_json["bach_zero"] = const is not None and const[1]
            if const is None:
                run.result("obstruction_bach", False, "obstruction is not a constant multiple of the Bach tensor")
            else:
                run.result("obstruction_bach", ob.is_tracefree and ob.is_tangential,
                           f"obstruction = {const[0]} * Bach" if const[0] is not None else "Bach and obstruction vanish")
        else:
            run.skip("obstruction_bach", f"Bach comparison applies to n=4 only (n={n})")
        report.obstruction = ob_json
    else:
        run.skip("obstruction_bach", f"odd n={n} has no obstruction")
    lap("ricci", s)

    # holonomy
    s = time.perf_counter()
    A = ambient_holonomy(amb, K)
    lap("ambient_holonomy", s)
    s = time.perf_counter()
    B = tractor_holonomy(amb, K)
    lap("tractor_holonomy", s)
    s = time.perf_counter()
    h = amb.h()
    cmp = compare_spans(B, A)
    closed_A = commutator_closure_check(A)
    closed_B = commutator_closure_check(B)
    report.holonomy = {
        "ambient": {**_span_json(A), "stabilized": A.stabilized(closed_A), "closed": closed_A},
        "tractor": {**_span_json(B), "stabilized": B.stabilized(closed_B), "closed": closed_B},
    }
    report.comparison = {"verdict": cmp.verdict, "dims": {"tractor": cmp.dims[0], "ambient": cmp.dims[1]},
                         "witness": None if cmp.witness is None else _matrix_json(cmp.witness)}
    run.result("span_equality", cmp.verdict == "equal", f"verdict {cmp.verdict}")
    run.result("tractor_in_ambient", cmp.verdict in ("equal", "a_in_b"), f"verdict {cmp.verdict}")
    skew = skewness_check(A, h) and skewness_check(B, h)
    run.result("skewness", skew)
    bound = (n + 2) * (n + 1) // 2
    run.result("dim_bound", A.dim <= bound and B.dim <= bound, f"dims {A.dim}, {B.dim} <= {bound}")
    run.result("history_monotone", A.monotone() and B.monotone())
    # a span whose dimension has stopped growing must be a Lie algebra
    plateau = [(side, c) for side, span, c in (("ambient", A, closed_A), ("tractor", B, closed_B))
               if len(span.history_list) >= 2 and span.history_list[-1] == span.history_list[-2]]
    if plateau:
        run.result("commutator_closure", all(c for _, c in plateau),
                   ", ".join(f"{side} closed={c}" for side, c in plateau))
    else:
        run.skip("commutator_closure", "no span stabilized within K_max")
    ts = T_slot_report(amb)
    run.result("T_slot", ts["passed"], "" if ts["passed"] else str(ts))
    lap("span_checks", s)

    # tractor bundle
    s = time.perf_counter()
    rng = random.Random(cfg.d_seed)
    if "connection_agreement" in run.wanted:
        r = connection_agreement(amb)
        run.result("connection_agreement", r.passed, "" if r.passed else f"entries {r.offending[:5]}")
    if {"metric_compatibility", "curvature_commutator"} & run.wanted:
        o = min(3, amb.order - 2)
        U = TractorJet([_random_xjet(rng, n, o) for _ in range(n + 2)])
        V = TractorJet([_random_xjet(rng, n, o) for _ in range(n + 2)])
        eta = [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n)]
        r = metric_compatibility(amb, eta, U, V)
        run.result("metric_compatibility", r.passed)
        r = curvature_commutator_check(amb, U)
        run.result("curvature_commutator", r.passed, "" if r.passed else f"pairs {r.offending}")
    tm = tractor_metric(amb)
    p, q = cfg.signature
    run.result("tractor_metric_signature", tm.is_symmetric() and tm.signature == (p + 1, q + 1),
               f"signature {tm.signature}")
    lap("tractor_checks", s)

    s = time.perf_counter()
    if "D_operator" in run.wanted:
        run.result(*_d_operator_check(amb, g, cfg, rng))
    lap("D_operator", s)

    s = time.perf_counter()
    if "gp_identity" in run.wanted:
        if n == 4:
            run.skip("gp_identity", "n=4 excluded (the identity divides by n-4)")
        else:
            try:
                r = gp_curvature_identity_check(amb)
                run.result("gp_identity", r.passed, r.detail if r.passed else f"{len(r.offending)} entries differ")
            except OrderExhausted as exc:
                run.skip("gp_identity", f"jet budget: {exc}")
    lap("gp_identity", s)

    kernel = parallel_tractor_detect(A, h)
    report.parallel_tractors = [{"vector": [_q(x) for x in v], "h_norm": _q(nm)} for v, nm in kernel]
    if "parallel_tractor" in run.wanted:
        if cfg.expect.get("einstein"):
            ker = RowSpace(n + 2, [v for v, _ in kernel])
            e = einstein_tractor(g)
            ok = ker.contains(e) and A.dim > 0
            run.result("parallel_tractor", ok, f"Einstein tractor {[_q(x) for x in e]} in kernel of dim {ker.dim}")
        elif A.dim == 0:
            run.result("parallel_tractor", len(kernel) == n + 2, f"kernel dim {len(kernel)}")
        else:
            run.result("parallel_tractor", True, f"kernel dim {len(kernel)}")

    if "expectations" in run.wanted:
        msgs = []
        ok = True
        if "dim" in cfg.expect:
            ok &= A.dim == cfg.expect["dim"] and B.dim == cfg.expect["dim"]
            msgs.append(f"dim {A.dim}/{B.dim} expected {cfg.expect['dim']}")
        if "stabilized" in cfg.expect:
            st = A.stabilized(closed_A) and B.stabilized(closed_B)
            ok &= st == bool(cfg.expect["stabilized"])
            msgs.append(f"stabilized {st}")
        if msgs:
            run.result("expectations", ok, "; ".join(msgs))
        else:
            run.skip("expectations", "scenario states no expected values")

    run.finish()
    clock["total"] = round(time.perf_counter() - t0, 3)
    report.timing = clock
    return report


def _bach_constant(g: TensorJet, ginv: TensorJet, O: TensorJet):
    """``(c, bach_is_zero)`` with ``O = c * Bach`` at the common order, or ``None``."""
    B = bach(g, ginv)
    n = g.chart.dim
    c = None
    zero = True
    for i in range(n):
        for j in range(n):
            o = min(O.comps[i, j].order, B.comps[i, j].order)
            a, b = O.comps[i, j].restrict(o).to_dict(), B.comps[i, j].restrict(o).to_dict()
            for e in set(a) | set(b):
                x, y = Fraction(a.get(e, 0)), Fraction(b.get(e, 0))
                if y == 0:
                    if x != 0:
                        return None
                    continue
                zero = False
                r = x / y
                if c is None:
                    c = r
                elif r != c:
                    return None
    return (None if c is None else _q(c)), zero


def _d_operator_check(amb: AmbientMetricJet, g: TensorJet, cfg: ScenarioConfig, rng: random.Random):
    n = cfg.n
    o = min(4, amb.order)
    compared = 0
    critical = []
    failures = []
    scale = ScaleData.of(g.map(lambda c: c.restrict(min(c.order, o + 2))))
    for w in cfg.d_weights:
        for k in range(cfg.d_samples):
            v = _random_xjet(rng, n, o)
            tails = [[_random_xjet(rng, n, max(o - 2 * (j + 1), 0)) for j in range(2)] for _ in range(2)]
            Vs = tractor_D_scale(v, w, scale)
            Da = tractor_D_ambient(amb, density_extension(v, w, n, o, tails[0]), w)
            Db = tractor_D_ambient(amb, density_extension(v, w, n, o, tails[1][:1]), w)
            m = min(Da.order, Db.order)
            if Da.restrict(m) != Db.restrict(m):
                failures.append(f"w={_q(w)} extension dependence")
            if n + 2 * w - 2 == 0:
                critical.append(_q(w))
                continue
            m = min(Da.order, Vs.order)
            compared += 1
            if Da.restrict(m) != Vs.restrict(m):
                failures.append(f"w={_q(w)} scale/ambient mismatch")
    detail = f"{compared} inputs compared at weights {[_q(w) for w in cfg.d_weights]}"
    if critical:
        detail += f"; critical weight {critical[0]} evaluated only"
    if failures:
        detail += "; " + "; ".join(sorted(set(failures)))
    return "D_operator", not failures, detail


# -- emission ---------------------------------------------------------------------


def report_text(report: Report) -> str:
    d = report.to_dict()
    sc = d["scenario"]
    lines = [f"scenario {sc['name']} (n={sc['n']}, signature {tuple(sc['signature'])}, K_max={sc['K_max']})"]
    if d["ambient"].get("weighted_order") is not None:
        lines.append(f"ambient metric: weighted order {d['ambient']['weighted_order']}, "
                     f"solved through rho^{d['ambient']['solve_depth']}")
    if d["holonomy"]:
        for side in ("tractor", "ambient"):
            hs = d["holonomy"][side]
            hist = " ".join(f"{k}:{v}" for k, v in hs["history"].items())
            lines.append(f"{side} holonomy: dim {hs['dim']} (history {hist}; stabilized {hs['stabilized']})")
        lines.append(f"span comparison: {d['comparison']['verdict']}")
    if d["obstruction"] is not None:
        ob = d["obstruction"]
        extra = f", Bach constant {ob.get('bach_constant')}" if "bach_constant" in ob else ""
        lines.append(f"obstruction: zero={ob['is_zero']} tracefree={ob['tracefree']}{extra}")
    if d["parallel_tractors"]:
        lines.append("parallel tractors: " + "; ".join(f"[{', '.join(p['vector'])}] norm {p['h_norm']}"
                                                       for p in d["parallel_tractors"]))
    for c in d["checks"]:
        lines.append(f"  {c['status'].upper():8s} {c['name']}" + (f": {c['detail']}" if c["detail"] else ""))
    cnt = d["summary"]["counts"]
    lines.append(f"result: {'PASS' if d['summary']['passed'] else 'FAIL'} "
                 f"({cnt['pass']} pass, {cnt['fail']} fail, {cnt['skipped']} skipped)")
    return "\n".join(lines) + "\n"


def emit_report(report: Report, fmt: str = "json", path=None) -> str:
    if fmt == "json":
        text = report_to_json(report)
    elif fmt == "text":
        text = report_text(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text
