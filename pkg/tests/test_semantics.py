from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minispec.corpus import load_corpus
from minispec.errors import (
    CalledHardwareFunction, DivisionByZero, GhostLeak, MissingSnapshot, EvalError,
    StepBudgetExceeded,
)
from minispec.frontend import parse_logic_expr, parse_source, resolve, resolve_logic
from minispec.frontend.ast import Assign, Block, If
from minispec.frontend.resolver import COUPLING, EXPECT
from minispec.semantics import ModuleState, Snapshot, eval_logic, exec_function, strip_ghost

TP, MANIFEST, DC, SCENARIOS = load_corpus()
C = TP.const_values


def prog(src: str):
    return resolve(parse_source(src, "t.mc"))


def logic(text: str, tp=TP, **kw):
    return resolve_logic(tp, parse_logic_expr(text), kw.pop("context", COUPLING), **kw)


def state(**values) -> ModuleState:
    return ModuleState.initial(TP).with_values(**values)


# -- logic evaluation ----------------------------------------------------------------------

def test_fail_trans_predicate_example():
    assert eval_logic(TP, logic("A_TempReadFailTrans(10, 17, 1)")) is True


def test_exp_of_zero():
    assert eval_logic(TP, logic("\\exp(0.0) == 1.0")) is True


def test_floor_goes_toward_negative_infinity():
    assert eval_logic(TP, logic("\\floor(-2.5) == -3")) is True
    assert eval_logic(TP, logic("temp_average(-3, 0) == -2")) is True


def test_logic_integers_do_not_wrap():
    assert eval_logic(TP, logic("65535 + 1 == 65536")) is True


def test_logic_division_by_zero_is_an_error():
    e = logic("1 / (gerrcnt - gerrcnt) == 0")
    with pytest.raises(DivisionByZero):
        eval_logic(TP, e, state().merged())


def test_old_reads_the_snapshot():
    fn = TP.function("cbit_set_work_cond")
    e = logic("\\old(gWorkCond) == NCD_IDLE_EMIT && gWorkCond == NCD_TEMP_LOW",
              context=EXPECT, fn=fn, allow_old=True)
    pre = state(gWorkCond=C["NCD_IDLE_EMIT"]).merged()
    post = dict(pre, gWorkCond=C["NCD_TEMP_LOW"])
    assert eval_logic(TP, e, post, snap=Snapshot(pre)) is True


def test_old_without_snapshot_is_reported():
    fn = TP.function("cbit_set_work_cond")
    e = logic("\\old(gWorkCond) == 0", context=EXPECT, fn=fn, allow_old=True)
    with pytest.raises(MissingSnapshot):
        eval_logic(TP, e, state().merged())


def test_thermistor_logic_matches_library():
    from minispec import thermo
    for t in (-40, 0, 25, 60, 125):
        e = logic(f"D({t}) == {thermo.adc_code(t)}")
        assert eval_logic(TP, e) is True


# -- execution -------------------------------------------------------------------------------

@pytest.mark.parametrize("pre,new,post", [
    ("NCD_IDLE_EMIT", "NCD_TEMP_LOW", "NCD_TEMP_LOW"),
    ("NCD_TEMP_HIGH", "NCD_NO_COMMAND", "NCD_NO_COMMAND"),
    ("NCD_TEMP_HIGH", "NCD_TEMP_LOW", "NCD_TEMP_HIGH"),
])
def test_setter_low_level_requirements(pre, new, post):
    s = state(WorkCondition=C[pre], gWorkCond=C[pre])
    r = exec_function(TP, "cbit_set_work_cond", {"new_cond": C[new]}, s)
    assert r.post_state.concrete["WorkCondition"] == C[post]
    assert r.post_state.ghost["gWorkCond"] == C[post]
    assert r.assertion_failures == ()


def test_entry_assertion_failure_is_recorded_not_raised():
    s = state(WorkCondition=C["NCD_TEMP_LOW"], gWorkCond=C["NCD_IDLE_EMIT"])
    r = exec_function(TP, "cbit_set_work_cond", {"new_cond": 5}, s)
    assert len(r.assertion_failures) == 1
    assert r.assertion_failures[0].kind == "assert"
    assert "gWorkCond == WorkCondition" in r.assertion_failures[0].text


def test_uint16_wraps_in_program_code():
    tp = prog("module w;\nstatic uint16_t x = 65535;\nvoid inc(void) { x = x + 1; }\n")
    assert exec_function(tp, "inc").post_state.concrete["x"] == 0


def test_int32_wraps_in_program_code():
    tp = prog("module w;\nstatic int32_t x = 2147483647;\nvoid inc(void) { x = x + 1; }\n")
    assert exec_function(tp, "inc").post_state.concrete["x"] == -2**31


def test_integer_division_truncates_toward_zero():
    tp = prog("module d;\nint32_t q(int32_t a, int32_t b) { return a / b; }\n")
    assert exec_function(tp, "q", {"a": -7, "b": 2}).return_value == -3
    with pytest.raises(DivisionByZero):
        exec_function(tp, "q", {"a": 1, "b": 0})


def test_step_budget_stops_runaway_loops():
    tp = prog("module l;\nvoid spin(void) { while (1 == 1) { } }\n")
    with pytest.raises(StepBudgetExceeded):
        exec_function(tp, "spin", budget=1000)


def test_hardware_function_needs_a_stub():
    with pytest.raises(CalledHardwareFunction):
        exec_function(TP, "adc_read", {"channel": 3})
    r = exec_function(TP, "adc_read", {"channel": 3},
                      stubs={"adc_read": lambda args, st: (900 + args[0], {})})
    assert r.return_value == 903


def test_loop_invariant_violation_is_recorded():
    tp = prog("""
    module v;
    static int32_t s = 0;
    void f(void) {
      int32_t i = 0;
      //@ loop invariant s <= 2;
      while (i < 5) { s = s + 1; i = i + 1; }
    }
    """)
    kinds = [f.kind for f in exec_function(tp, "f").assertion_failures]
    assert kinds == ["invariant_preserve"] * 3      # s = 3, 4, 5


def test_execution_is_deterministic_including_trace():
    s = state(gADC=tuple(814 if i in (3, 4) else 0 for i in range(16)))
    stubs = {"adc_read": lambda args, st: (st["gADC"][args[0]], {})}
    a = exec_function(TP, "acq_measure_temp", {}, s, stubs=stubs)
    b = exec_function(TP, "acq_measure_temp", {}, s, stubs=stubs)
    assert a == b and a.trace
    assert a.out_params == {"temp1": 25, "temp2": 25}


def test_snapshot_is_isolated_from_later_mutation():
    pre = state().merged()
    snap = Snapshot(pre)
    pre["gWorkCond"] = 99
    assert snap.state["gWorkCond"] == C["NCD_IDLE_EMIT"]
    with pytest.raises(TypeError):
        snap.state["gWorkCond"] = 1


# -- ghost erasure ----------------------------------------------------------------------------

def test_strip_ghost_reduces_setter_to_guarded_assignment():
    body = strip_ghost(TP).function("cbit_set_work_cond").body
    assert len(body.stmts) == 1 and isinstance(body.stmts[0], If)
    then = body.stmts[0].then
    assert isinstance(then, Block) and len(then.stmts) == 1
    assert isinstance(then.stmts[0], Assign) and not then.stmts[0].ghost


def test_strip_ghost_is_identity_without_ghosts():
    tp = prog("module p;\nstatic int32_t x = 0;\nvoid f(int32_t a) { if (a > 0) { x = a; } }\n")
    assert strip_ghost(tp) == tp


def test_strip_ghost_detects_leaks():
    tp = prog("module p;\n//@ ghost int32_t g = 0;\nstatic int32_t x = 0;\nvoid f(void) { x = 1; }\n")
    from dataclasses import replace
    from minispec.frontend.ast import Name
    fn = tp.function("f")
    bad = replace(fn.body.stmts[0], value=Name("g", binding="ghost", ty=fn.body.stmts[0].value.ty))
    leaky = replace(tp, functions=(replace(fn, body=replace(fn.body, stmts=(bad,))),))
    with pytest.raises(GhostLeak):
        strip_ghost(leaky)


ERASURE_SAMPLES = 1000
NCD = ("NCD_IDLE_EMIT", "NCD_NO_COMMAND", "NCD_TEMP_LOW", "NCD_TEMP_HIGH")


def _outcome(tp, fn, args, st, stubs):
    try:
        r = exec_function(tp, fn, args, st, stubs=stubs, trace=False)
    except EvalError as exc:
        return ("error", type(exc).__name__, exc.message)
    return (r.return_value, dict(r.out_params), dict(r.post_state.concrete))


def _concrete_only(tp, st: ModuleState) -> ModuleState:
    return ModuleState({k: v for k, v in st.concrete.items()}, {})


def _random_state(rng):
    wc = C[rng.choice(NCD)] if rng.random() < 0.8 else rng.randrange(65536)
    cnt = rng.randrange(6)
    temp = rng.randrange(-60, 140)
    adc = tuple(rng.randrange(300, 1300) for _ in range(16))
    return state(WorkCondition=wc, gWorkCond=wc, ErrCnt=cnt, gerrcnt=cnt,
                 ModuleTemp=temp, gModuleTemp=temp, gADC=adc)


@pytest.mark.parametrize("fn", ["cbit_set_work_cond", "cbit_check_temperature", "acq_measure_temp"])
def test_ghost_erasure_preserves_concrete_behaviour(fn):
    stripped = strip_ghost(TP)
    rng = random.Random(fn)
    for _ in range(ERASURE_SAMPLES):
        st = _random_state(rng)
        codes = {3: rng.randrange(380, 1240), 4: rng.randrange(380, 1240)}
        stubs = {"adc_read": lambda args, s, codes=codes: (codes.get(args[0], 0), {})}
        args = {"new_cond": rng.randrange(65536)} if fn == "cbit_set_work_cond" else {}
        full = _outcome(TP, fn, args, st, stubs)
        erased = _outcome(stripped, fn, args, _concrete_only(stripped, st), stubs)
        assert full == erased, (fn, st, codes, args)


# -- property checks ---------------------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.integers(0, 65535), st.integers(0, 65535))
def test_uint16_addition_matches_modular_arithmetic(a, b):
    tp = _ADD
    assert exec_function(tp, "add", {"a": a, "b": b}).return_value == (a + b) % 65536


_ADD = prog("module a;\nuint16_t add(uint16_t a, uint16_t b) { return a + b; }\n")


@settings(max_examples=200, deadline=None)
@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_logic_average_is_floor_of_half_sum(t1, t2):
    e = logic(f"temp_average({t1}, {t2}) == {math.floor((t1 + t2) / 2)}")
    assert eval_logic(TP, e) is True
