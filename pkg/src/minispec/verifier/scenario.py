"""Multi-call scenarios: a sequence of calls against one evolving module state."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from minispec.errors import (
    CalledHardwareFunction, ConfigError, EvalError, MinispecError, StubMissing,
)
from minispec.frontend.parser import parse_logic_expr
from minispec.frontend.resolver import EXPECT, resolve_logic
from minispec.semantics import ExecResult, ModuleState, Snapshot, eval_logic, exec_function
from minispec.verifier.config import DomainConfig
from minispec.verifier.stubs import injected, make_stub


@dataclass(frozen=True)
class Step:
    call: str
    args: Mapping[str, Any] = field(default_factory=dict)
    inject: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)
    expect: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Scenario:
    name: str
    steps: Tuple[Step, ...] = ()
    state: Mapping[str, Any] = field(default_factory=dict)

    @staticmethod
    def from_dict(data: Mapping[str, Any], name: str = "scenario") -> "Scenario":
        if not isinstance(data, Mapping):
            raise ConfigError("scenario must be a JSON object")
        unknown = set(data) - {"name", "steps", "state"}
        if unknown:
            raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        steps = []
        for i, s in enumerate(data.get("steps", [])):
            if not isinstance(s, Mapping) or "call" not in s:
                raise ConfigError(f"step {i}: needs a 'call'")
            extra = set(s) - {"call", "args", "inject", "expect"}
            if extra:
                raise ConfigError(f"step {i}: unknown keys {sorted(extra)}")
            expect = s.get("expect", [])
            if isinstance(expect, str):
                expect = [expect]
            steps.append(Step(s["call"], dict(s.get("args", {})),
                              {k: dict(v) for k, v in s.get("inject", {}).items()},
                              tuple(expect)))
        return Scenario(data.get("name", name), tuple(steps), dict(data.get("state", {})))


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return Scenario.from_dict(data, path.stem)


@dataclass(frozen=True)
class StepResult:
    index: int
    call: str
    result: Any
    passed: bool
    failures: Tuple[str, ...] = ()
    state: Optional[ModuleState] = None


@dataclass(frozen=True)
class ScenarioResult:
    name: str
    steps: Tuple[StepResult, ...]
    final_state: ModuleState

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.steps)

    @property
    def first_failure(self) -> Optional[StepResult]:
        return next((s for s in self.steps if not s.passed), None)


def _value(tp, v, where: str):
    if isinstance(v, str):
        if v not in tp.const_values:
            raise ConfigError(f"{where}: unknown constant '{v}'")
        return tp.const_values[v]
    if isinstance(v, list):
        return tuple(_value(tp, x, where) for x in v)
    return v


def initial_state(tp, overrides: Mapping[str, Any]) -> ModuleState:
    values = ModuleState.initial(tp).merged()
    for key, v in overrides.items():
        name = key.split("::", 1)[1] if "::" in key else key
        mv = tp.module_var(name)
        if name not in values or ("::" in key and (mv is None or mv.module != key.split("::")[0])):
            raise ConfigError(f"scenario state: unknown variable '{key}'")
        values[name] = _value(tp, v, f"state {key}")
    return ModuleState.split(tp, values)


def _stubs(tp, dc: Optional[DomainConfig], step: Step):
    stubs = {}
    if dc is not None:
        for name, spec in dc.stubs.items():
            if spec.kind != "outputs" and tp.has_function(name) and name != step.call:
                stubs[name] = make_stub(tp, name, spec, {})
    for name, outs in step.inject.items():
        if not tp.has_function(name):
            raise ConfigError(f"inject: unknown function '{name}'")
        stubs[name] = injected(name, {k: _value(tp, v, f"inject {name}.{k}")
                                      for k, v in outs.items()})
    return stubs


def run_step(tp, state: ModuleState, step: Step, dc: Optional[DomainConfig] = None,
             index: int = 0) -> Tuple[StepResult, ModuleState]:
    if not tp.has_function(step.call):
        raise ConfigError(f"step {index}: unknown function '{step.call}'")
    fn = tp.function(step.call)
    args = {k: _value(tp, v, f"step {index} args") for k, v in step.args.items()}
    expects = [(text, resolve_logic(tp, parse_logic_expr(text, "<expect>"), EXPECT, fn=fn,
                                    allow_old=True,
                                    result_type=fn.ret if fn.ret.name != "void" else None))
               for text in step.expect]
    try:
        res: ExecResult = exec_function(tp, step.call, args, state,
                                        stubs=_stubs(tp, dc, step), trace=False)
    except CalledHardwareFunction as exc:
        raise StubMissing(exc.message, exc.span) from None
    except StubMissing:
        raise
    except EvalError as exc:
        msg = f"runtime error: {type(exc).__name__}: {exc.message}"
        return StepResult(index, step.call, None, False, (msg,), state), state
    failures = [f.render() for f in res.assertion_failures]
    pre = state.merged()
    snap = Snapshot(pre, {k: v for k, v in args.items()})
    post = res.post_state.merged()
    env: Dict[str, Any] = dict(post)
    env.update({k: v for k, v in args.items()})
    env.update({"*" + k: v for k, v in res.out_params.items()})
    for text, e in expects:
        try:
            ok = eval_logic(tp, e, env, snap=snap, result=res.return_value)
        except MinispecError as exc:
            failures.append(f"{text}: {exc.message}")
            continue
        if not ok:
            failures.append(f"expectation failed: {text}")
    return (StepResult(index, step.call, res.return_value, not failures, tuple(failures),
                       res.post_state), res.post_state)


def run_scenario(tp, sc: Scenario, dc: Optional[DomainConfig] = None,
                 state: Optional[ModuleState] = None) -> ScenarioResult:
    """Run the steps in order; failures are recorded and execution continues."""
    if state is None:
        state = initial_state(tp, sc.state)
    results: List[StepResult] = []
    for i, step in enumerate(sc.steps):
        r, state = run_step(tp, state, step, dc, i)
        results.append(r)
    return ScenarioResult(sc.name, tuple(results), state)
