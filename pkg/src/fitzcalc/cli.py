"""Scenario-driven command line front end.

    fitzcalc run <scenario.json> [--oracle] [--out DIR]
    fitzcalc export <scenario.json> <object> [--format csv|json] --out FILE
    fitzcalc list-checks

Exit codes: 0 all checks pass, 1 check failures, 2 scenario/parse errors,
3 internal errors.  Reports are deterministic: identical scenarios give
byte-identical JSON up to the "timings" section.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .checks import (Scenario, ScenarioContext, check_descriptions,
                     run_checks)
from .grids import save_csv, save_json

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_INTERNAL = 3

_EXPORTABLE = ("fitzpatrick", "sigma", "phi", "graph_bifunction",
               "saddle_lower", "saddle_upper", "saddle_graph")


def _load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return Scenario.from_dict(doc)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


class ScenarioError(Exception):
    pass


def _grid_object(ctx: ScenarioContext, name: str):
    from .operators import graph_bifunction
    if name == "fitzpatrick":
        return ctx.fitz
    if name == "sigma":
        return ctx.sigma_fn
    if name == "phi":
        return ctx.phi
    if name == "graph_bifunction":
        return graph_bifunction(ctx.op, ctx.xgrid, ctx.ygrid)
    if name == "saddle_lower":
        return ctx.pair.lower
    if name == "saddle_upper":
        return ctx.pair.upper
    if name == "saddle_graph":
        return ctx.ghat
    raise ScenarioError(f"unknown object {name!r}; choose from {_EXPORTABLE}")


def cmd_run(args) -> int:
    scenario = _load_scenario(args.scenario)
    out_dir = Path(args.out or scenario.output_dir)
    ctx = ScenarioContext(scenario)

    names = list(scenario.checks) or ["representative", "roundtrip"]
    if args.oracle and "oracle" not in names:
        names.append("oracle")

    timings = {}
    reports = []
    check_docs = []
    for name in names:
        t0 = time.perf_counter()
        suite_reports = run_checks(ctx, [name])
        timings[name] = round(time.perf_counter() - t0, 6)
        reports.extend(suite_reports)
        check_docs.extend({"suite": name, **r.to_dict()}
                          for r in suite_reports)

    passed = all(r.passed for r in reports)
    report_doc = {
        "scenario": scenario.echo(),
        "checks": check_docs,
        "warnings": sorted(set(ctx.warnings)),
        "passed": passed,
        "timings": timings,
    }

    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w") as fh:
        json.dump(report_doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    for name in ("fitzpatrick", "sigma", "phi"):
        grid = _grid_object(ctx, name)
        save_csv(grid, out_dir / f"{name}.csv")
        save_json(grid, out_dir / f"{name}.json")

    lines = [f"scenario: {args.scenario}",
             f"operator: {scenario.operator.kind}"]
    for r in reports:
        mark = "PASS" if r.passed else "FAIL"
        lines.append(f"[{mark}] {r.name}: max violation {r.max_violation:.3e}"
                     f" (tol {r.tol:.3e})")
    for w in report_doc["warnings"]:
        lines.append(f"warning: {w}")
    lines.append("result: " + ("all checks passed" if passed
                               else "some checks FAILED"))
    text = "\n".join(lines)
    with open(out_dir / "report.txt", "w") as fh:
        fh.write(text + "\n")
    print(text)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_export(args) -> int:
    scenario = _load_scenario(args.scenario)
    ctx = ScenarioContext(scenario)
    grid = _grid_object(ctx, args.object)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.format == "csv":
        save_csv(grid, out)
    else:
        save_json(grid, out)
    print(f"wrote {args.object} to {out}")
    return EXIT_OK


def cmd_list_checks(_args) -> int:
    for name, desc in check_descriptions():
        print(f"{name} — {desc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fitzcalc",
        description="grid engine for representative functions of maximal "
                    "monotone operators on the real line",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the checks of a scenario file")
    p_run.add_argument("scenario", help="path to a scenario JSON file")
    p_run.add_argument("--oracle", action="store_true",
                       help="also cross-check against the exact closed form")
    p_run.add_argument("--out", default=None,
                       help="output directory (default: scenario output_dir)")
    p_run.set_defaults(fn=cmd_run)

    p_exp = sub.add_parser("export", help="compute one grid object and write it")
    p_exp.add_argument("scenario")
    p_exp.add_argument("object", choices=_EXPORTABLE)
    p_exp.add_argument("--format", choices=("csv", "json"), default="csv")
    p_exp.add_argument("--out", required=True)
    p_exp.set_defaults(fn=cmd_export)

    p_list = sub.add_parser("list-checks", help="list registered check suites")
    p_list.set_defaults(fn=cmd_list_checks)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except Exception as exc:  # internal failure contract
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
