"""Command line entry point: ``tractorlab run <file>`` and ``tractorlab suite``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .labcli import ConfigError, ScenarioAborted, builtin_scenarios, emit_report, load_scenario, run_scenario


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tractorlab", description="Exact jet-level checks of tractor and ambient holonomy.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("--kmax", type=int, default=None, help="override K_max from the scenario")
        sp.add_argument("--mode", choices=("exact",), default="exact", help="arithmetic mode (only exact exists)")
        sp.add_argument("--negative-control", dest="negative_control", default=None, help=argparse.SUPPRESS)

    r = sub.add_parser("run", help="run one scenario file")
    r.add_argument("scenario", type=Path)
    r.add_argument("--out", type=Path, default=None, help="report path (default: stdout)")
    common(r)

    s = sub.add_parser("suite", help="run every built-in scenario")
    s.add_argument("--out", type=Path, default=None, help="directory for one report per scenario")
    s.add_argument("--only", action="append", default=None, help="restrict to scenarios whose name contains this")
    common(s)
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.kmax is not None and args.kmax < 2:
        print("tractorlab: --kmax must be at least 2", file=sys.stderr)
        return 2
    ext = "json" if args.format == "json" else "txt"
    if args.command == "run":
        try:
            cfg = load_scenario(args.scenario)
        except ConfigError as exc:
            print(f"tractorlab: {exc}", file=sys.stderr)
            return 2
        try:
            rep = run_scenario(cfg, kmax=args.kmax, _negative_control=args.negative_control)
        except ScenarioAborted as exc:
            print(f"tractorlab: {exc}", file=sys.stderr)
            return 1
        out = args.out if args.out is not None else (Path(cfg.output) if cfg.output else None)
        text = emit_report(rep, args.format, out)
        if out is None:
            sys.stdout.write(text)
        return 0 if rep.passed else 1

    ok = True
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
    for fname, cfg in builtin_scenarios():
        if args.only and not any(o in cfg.name for o in args.only):
            continue
        try:
            rep = run_scenario(cfg, kmax=args.kmax, _negative_control=args.negative_control)
        except ScenarioAborted as exc:
            print(f"{cfg.name}: ABORTED {exc}")
            ok = False
            continue
        if args.out is not None:
            emit_report(rep, args.format, args.out / f"{cfg.name}.{ext}")
        counts = rep.to_dict()["summary"]["counts"]
        verdict = rep.comparison.get("verdict", "-")
        print(f"{cfg.name}: {'PASS' if rep.passed else 'FAIL'} spans {verdict} "
              f"({counts['pass']} pass, {counts['fail']} fail, {counts['skipped']} skipped)", flush=True)
        ok = ok and rep.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
