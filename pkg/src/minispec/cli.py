"""Command-line front end: ``minispec {check,verify,scenario,table,report}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from minispec import __version__
from minispec.errors import MinispecError, ParseError
from minispec.frontend import load_program, parse_files, resolve
from minispec.verifier.config import DomainConfig
from minispec.verifier.obligations import gen_obligations
from minispec.verifier.report import Report, verify_program
from minispec.verifier.scenario import load_scenario, run_scenario

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 2 with a one-line diagnostic
        self.print_usage(sys.stderr)
        raise _Usage(f"{self.prog}: error: {message}")


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="minispec", description="Contract checking for annotated C-like modules.")
    p.add_argument("--version", action="version", version=f"minispec {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, files=True):
        if files:
            sp.add_argument("files", nargs="+", type=Path, help=".mc source files")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--out", type=Path, help="write output to this file")

    c = sub.add_parser("check", help="parse and resolve")
    common(c)

    v = sub.add_parser("verify", help="check every obligation over the configured domains")
    common(v)
    v.add_argument("--domains", type=Path, required=True)
    v.add_argument("--function", action="append", help="only this function (repeatable)")
    v.add_argument("--budget-ms", type=int)
    v.add_argument("--max-states", type=int)
    v.add_argument("--strict", action="store_true", help="Unknown/Timeout also exit 1")

    s = sub.add_parser("scenario", help="run multi-call scenarios")
    common(s)
    s.add_argument("--domains", type=Path, required=True)
    s.add_argument("--scenario", type=Path, action="append", required=True)

    t = sub.add_parser("table", help="thermistor lookup table as CSV")
    common(t, files=False)
    t.add_argument("--t-min", type=int, default=-40)
    t.add_argument("--t-max", type=int, default=125)
    t.add_argument("--n", type=int, default=100)
    t.add_argument("--mc", action="store_true", help="also print ghost-array declarations")

    r = sub.add_parser("report", help="reformat a saved JSON report")
    r.add_argument("report", type=Path)
    r.add_argument("--format", choices=("text", "json"), default="text")
    r.add_argument("--out", type=Path)
    return p


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _domains(args) -> DomainConfig:
    dc = DomainConfig.load(args.domains)
    kw = {}
    if getattr(args, "budget_ms", None) is not None:
        kw["budget_ms"] = args.budget_ms
    if getattr(args, "max_states", None) is not None:
        kw["max_states"] = args.max_states
    for k, v in kw.items():
        if v <= 0:
            raise _Usage(f"--{k.replace('_', '-')} must be positive")
    return dc.replace(**kw) if kw else dc


def cmd_check(args) -> int:
    prog = parse_files(args.files)
    try:
        tp = resolve(prog)
    except MinispecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    rows = []
    for fn in tp.functions:
        if fn.body is None and not fn.hardware:
            continue
        n = None if fn.hardware else len(gen_obligations(tp, fn.name))
        rows.append({"name": fn.name, "hardware": fn.hardware, "obligations": n})
    if args.format == "json":
        _emit(json.dumps({"functions": rows}, indent=2) + "\n", args.out)
    else:
        lines = [f"{len(rows)} function{'s' if len(rows) != 1 else ''}"]
        for r in rows:
            what = "hardware" if r["hardware"] else f"{r['obligations']} obligations"
            lines.append(f"  {r['name']}: {what}")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    tp = load_program(args.files)
    dc = _domains(args)
    if args.function:
        for name in args.function:
            if not tp.has_function(name):
                raise _Usage(f"no function '{name}'")
    report = verify_program(tp, dc, args.function)
    _emit(report.to_json() if args.format == "json" else report.to_text(), args.out)
    return _verify_exit(report, args.strict)


def _verify_exit(report: Report, strict: bool) -> int:
    _, _, failed, unknown, timeout = report.totals
    if failed or (strict and (unknown or timeout)):
        return EXIT_FAIL
    return EXIT_OK


def cmd_scenario(args) -> int:
    tp = load_program(args.files)
    dc = _domains(args)
    results = [run_scenario(tp, load_scenario(path), dc) for path in args.scenario]
    if args.format == "json":
        data = [{"name": r.name, "passed": r.passed,
                 "steps": [{"call": s.call, "result": s.result, "passed": s.passed,
                            "failures": list(s.failures)} for s in r.steps],
                 "final_state": {**r.final_state.concrete, **r.final_state.ghost}}
                for r in results]
        _emit(json.dumps(data, indent=2) + "\n", args.out)
    else:
        lines = []
        for r in results:
            lines.append(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  ({len(r.steps)} steps)")
            for s in r.steps:
                lines.append(f"  [{s.index}] {s.call} -> {s.result}"
                             + ("" if s.passed else "  FAILED"))
                lines.extend(f"      {f}" for f in s.failures)
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_table(args) -> int:
    from minispec.thermo import build_table, to_csv, to_mc
    table = build_table(args.t_min, args.t_max, args.n)
    if args.format == "json":
        text = json.dumps({"t_min": table.t_min, "t_max": table.t_max,
                           "entries": [list(e) for e in table.entries]}, indent=2) + "\n"
    else:
        text = to_csv(table)
        if args.mc:
            text += "\n" + to_mc(table)
    _emit(text, args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    report = Report.from_json(args.report.read_text(encoding="utf-8"))
    _emit(report.to_json() if args.format == "json" else report.to_text(), args.out)
    return EXIT_OK


COMMANDS = {"check": cmd_check, "verify": cmd_verify, "scenario": cmd_scenario,
            "table": cmd_table, "report": cmd_report}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except _Usage as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MinispecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run_cli(argv))
