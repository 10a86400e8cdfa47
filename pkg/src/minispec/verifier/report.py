"""Per-function verification summary: text table and JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from minispec.errors import ConfigError, VerifierError
from minispec.verifier.config import DomainConfig, describe_assumptions
from minispec.verifier.engine import FAILED, TIMEOUT, UNKNOWN, VALID, Verdict

COLUMNS = ("scheduled", "valid", "failed", "unknown", "timeout")


@dataclass(frozen=True)
class Row:
    name: str
    counts: Optional[Tuple[int, int, int, int, int]]      # None: hardware, not checked
    obligations: Tuple[Mapping[str, Any], ...] = ()
    coverage: Tuple[Mapping[str, Any], ...] = ()


@dataclass(frozen=True)
class Report:
    rows: Tuple[Row, ...]
    assumptions: Tuple[str, ...] = ()

    @property
    def totals(self) -> Tuple[int, int, int, int, int]:
        sums = [0] * len(COLUMNS)
        for r in self.rows:
            if r.counts is not None:
                sums = [a + b for a, b in zip(sums, r.counts)]
        return tuple(sums)

    @property
    def failed(self) -> int:
        return self.totals[2]

    def to_dict(self) -> Dict[str, Any]:
        functions = []
        for r in self.rows:
            d: Dict[str, Any] = {"name": r.name}
            for col, v in zip(COLUMNS, r.counts or (None,) * len(COLUMNS)):
                d[col] = v
            d["obligations"] = [dict(o) for o in r.obligations]
            d["coverage"] = [dict(g) for g in r.coverage]
            functions.append(d)
        return {"functions": functions, "totals": dict(zip(COLUMNS, self.totals)),
                "assumptions": list(self.assumptions)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> "Report":
        try:
            rows = []
            for f in data["functions"]:
                counts = None if f.get("scheduled") is None else tuple(int(f[c]) for c in COLUMNS)
                rows.append(Row(f["name"], counts, tuple(f.get("obligations", ())),
                                tuple(f.get("coverage", ()))))
            return Report(tuple(rows), tuple(data.get("assumptions", ())))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"not a report: {exc}") from None

    @staticmethod
    def from_json(text: str) -> "Report":
        try:
            return Report.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid report JSON: {exc}") from None

    def to_text(self, details: bool = True) -> str:
        width = max([len("Function"), len("Total")] + [len(r.name) for r in self.rows])
        head = f"{'Function':<{width}}  " + "  ".join(f"{c.capitalize():>9}" for c in COLUMNS)
        lines = [head, "-" * len(head)]
        for r in self.rows:
            cells = r.counts if r.counts is not None else ("-",) * len(COLUMNS)
            lines.append(f"{r.name:<{width}}  " + "  ".join(f"{c:>9}" for c in cells))
        lines.append("-" * len(head))
        lines.append(f"{'Total':<{width}}  " + "  ".join(f"{c:>9}" for c in self.totals))
        if self.assumptions:
            lines.append("")
            lines.append("Assumptions (review required):")
            lines.extend(f"  {a}" for a in self.assumptions)
        if details:
            notes = []
            for r in self.rows:
                for o in r.obligations:
                    if o["status"] != VALID:
                        line = f"  {o['status']:<8} {o['id']}"
                        if o.get("detail"):
                            line += f": {o['detail']}"
                        notes.append(line)
                        if o.get("counterexample"):
                            cex = ", ".join(f"{k}={v}" for k, v in o["counterexample"].items())
                            notes.append(f"           at {cex}")
                for g in r.coverage:
                    notes.append(f"  Gap      {r.name}: output {g['output']} unspecified at "
                                 f"{g['count']} of {g['total']} points")
                    cex = ", ".join(f"{k}={v}" for k, v in g["witness"].items())
                    notes.append(f"           e.g. {cex}")
            if notes:
                lines.append("")
                lines.append("Findings:")
                lines.extend(notes)
        return "\n".join(lines) + "\n"


def verdict_dict(v: Verdict) -> Dict[str, Any]:
    d: Dict[str, Any] = {"id": v.id, "kind": v.kind, "status": v.status,
                         "states_checked": v.states_checked}
    if v.counterexample is not None:
        d["counterexample"] = dict(v.counterexample)
    if v.detail:
        d["detail"] = v.detail
    return d


def count(verdicts: Sequence[Verdict]) -> Tuple[int, int, int, int, int]:
    statuses = [v.status for v in verdicts]
    return (len(statuses), statuses.count(VALID), statuses.count(FAILED),
            statuses.count(UNKNOWN), statuses.count(TIMEOUT))


def summarize(results: Mapping[str, Optional[Sequence[Verdict]]],
              assumptions: Sequence[str] = (),
              coverage: Optional[Mapping[str, Sequence[Any]]] = None) -> Report:
    """One row per function (insertion order); ``None`` marks a hardware function."""
    rows = []
    for name, verdicts in results.items():
        gaps = tuple({"output": g.output, "count": g.count, "total": g.total,
                      "witness": dict(g.witness)} for g in (coverage or {}).get(name, ()))
        if verdicts is None:
            rows.append(Row(name, None))
        else:
            rows.append(Row(name, count(verdicts), tuple(verdict_dict(v) for v in verdicts),
                            gaps))
    return Report(tuple(rows), tuple(assumptions))


def verify_program(tp, dc: DomainConfig, functions: Optional[Sequence[str]] = None,
                   coverage: bool = True) -> Report:
    """Verify every defined function (or the named ones) and summarize."""
    from minispec.verifier.coverage import output_coverage
    from minispec.verifier.engine import Problem, verify_function

    if functions is None:
        functions = [f.name for f in tp.functions if f.body is not None or f.hardware]
    results: Dict[str, Optional[List[Verdict]]] = {}
    gaps: Dict[str, Any] = {}
    stubs_used = set()
    skipped: List[str] = []
    for name in functions:
        fn = tp.function(name)
        if fn.hardware:
            results[name] = None
            continue
        results[name] = verify_function(tp, name, dc)
        if results[name]:
            stubs_used |= set(Problem(tp, name, dc).stub_specs)
        if coverage and fn.body is not None and fn.contract is not None \
                and fn.contract.behaviors:
            try:
                gaps[name] = output_coverage(tp, name, dc)
            except VerifierError as exc:
                # a lint that ran out of budget proves nothing; say so instead of aborting
                skipped.append(f"coverage not checked: {exc.message}")
    assumptions = describe_assumptions(dc, sorted(stubs_used)) + skipped
    return summarize(results, assumptions, gaps)
