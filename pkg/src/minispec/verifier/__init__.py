"""Obligation generation and bounded exhaustive checking."""

from minispec.verifier.config import Domain, DomainConfig, StubSpec, describe_assumptions
from minispec.verifier.coverage import CoverageGap, output_coverage
from minispec.verifier.engine import (
    FAILED, STATUSES, TIMEOUT, UNKNOWN, VALID, Verdict, check_behavior_sets, check_frame,
    check_obligation, replay, run_batch, verify_function,
)
from minispec.verifier.obligations import (
    ASSERTION, COMPLETE, DISJOINT, ENSURES, FRAME, KINDS, LOOP_INIT, LOOP_PRESERVE, Obligation,
    gen_obligations,
)
from minispec.verifier.report import Report, Row, summarize, verify_program
from minispec.verifier.scenario import (
    Scenario, ScenarioResult, Step, StepResult, load_scenario, run_scenario,
)

__all__ = [
    "Domain", "DomainConfig", "StubSpec", "describe_assumptions", "CoverageGap",
    "output_coverage", "FAILED", "STATUSES", "TIMEOUT", "UNKNOWN", "VALID", "Verdict",
    "check_behavior_sets", "check_frame", "check_obligation", "replay", "run_batch",
    "verify_function", "ASSERTION", "COMPLETE", "DISJOINT", "ENSURES", "FRAME", "KINDS",
    "LOOP_INIT", "LOOP_PRESERVE", "Obligation", "gen_obligations", "Report", "Row",
    "summarize", "verify_program", "Scenario", "ScenarioResult", "Step", "StepResult",
    "load_scenario", "run_scenario",
]
