from __future__ import annotations

import operator
import re

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from minispec.corpus import ROOT, load_corpus, load_variant
from minispec.errors import (
    ConfigError, DomainMissing, HardwareFunction, StubMissing, VerifierError,
)
from minispec.frontend import load_program, parse_source, resolve
from minispec.verifier import (
    COMPLETE, DISJOINT, ENSURES, FAILED, FRAME, TIMEOUT, UNKNOWN, VALID, ASSERTION,
    LOOP_INIT, LOOP_PRESERVE, DomainConfig, Scenario, check_behavior_sets, check_frame,
    check_obligation, gen_obligations, output_coverage, replay, run_scenario, summarize,
    verify_function, verify_program,
)
from oracles import brute_force_behavior_sets

TP, MANIFEST, DC, SCENARIOS = load_corpus()
C = TP.const_values
SETTER = "cbit_set_work_cond"
CHECK = "cbit_check_temperature"
ACQ = "acq_measure_temp"


def prog(src: str):
    return resolve(parse_source(src, "t.mc"))


def by_id(verdicts):
    return {v.id: v for v in verdicts}


def small_setter_dc():
    return DC.with_domains(**{"cbit_set_work_cond.new_cond": {
        "values": [0, 1, 2, 3, 4, 65534, 65535]}})


# -- obligation generation ---------------------------------------------------------------

def test_setter_has_six_obligations():
    obs = gen_obligations(TP, SETTER)
    assert len(obs) == 6
    assert [o.kind for o in obs] == [ENSURES] * 3 + [COMPLETE, DISJOINT, ASSERTION]


def test_obligation_counts_match_manifest():
    for f in MANIFEST.functions:
        if f.hardware:
            with pytest.raises(HardwareFunction):
                gen_obligations(TP, f.name)
        else:
            assert len(gen_obligations(TP, f.name)) == f.obligations


def test_contract_free_function_has_no_obligations():
    tp = prog("module e;\nvoid f(void) { }\n")
    assert gen_obligations(tp, "f") == []


def test_loop_plus_single_ensures_gives_three():
    tp = prog("""
    module l;
    //@ ghost int32_t g = 0;
    /*@ behavior B: ensures g >= 0; @*/
    void f(void);
    void f(void) {
      int32_t i = 0;
      //@ loop invariant 0 <= i <= 3;
      while (i < 3) { i = i + 1; }
    }
    """)
    assert [o.kind for o in gen_obligations(tp, "f")] == [ENSURES, LOOP_INIT, LOOP_PRESERVE]


def test_obligation_ids_are_unique_and_stable():
    for f in (SETTER, CHECK, ACQ):
        a = [o.id for o in gen_obligations(TP, f)]
        assert len(set(a)) == len(a)
        assert a == [o.id for o in gen_obligations(load_corpus()[0], f)]


# -- the bounded checker -------------------------------------------------------------------

def test_setter_all_valid_and_counts_match_filtered_domains():
    vs = by_id(verify_function(TP, SETTER, DC))
    assert all(v.status == VALID for v in vs.values())
    assert vs["cbit_set_work_cond:ensures:NoCommand:0"].states_checked == 4
    assert vs["cbit_set_work_cond:ensures:ModifyWC:0"].states_checked == 65535
    assert vs["cbit_set_work_cond:ensures:KeepWC:0"].states_checked == 3 * 65535
    assert vs["cbit_set_work_cond:complete"].states_checked == 4 * 65536


def test_missing_domain_is_reported():
    dc = DomainConfig.from_dict({"domains": {"gWorkCond": {"values": [0]}}})
    with pytest.raises(DomainMissing) as exc:
        verify_function(TP, SETTER, dc)
    assert "new_cond" in exc.value.message


def test_hardware_function_is_not_verified():
    with pytest.raises(HardwareFunction):
        verify_function(TP, "adc_read", DC)


def test_domain_values_must_fit_the_type():
    dc = DC.with_domains(**{"cbit_set_work_cond.new_cond": {"values": [70000]}})
    with pytest.raises(ConfigError):
        verify_function(TP, SETTER, dc)


def test_uncorrected_cold_ensures_fails_with_non_idle_pre_state():
    tp = load_variant("uncorrected")
    vs = by_id(verify_function(tp, CHECK, DC))
    v = vs["cbit_check_temperature:ensures:TempOK:3"]
    assert v.status == FAILED
    assert v.counterexample["gWorkCond"] != C["NCD_IDLE_EMIT"]
    ob = next(o for o in gen_obligations(tp, CHECK) if o.id == v.id)
    assert replay(tp, ob, DC, v.counterexample)


def test_corrected_ensures_valid():
    vs = by_id(verify_function(TP, CHECK, DC))
    assert vs["cbit_check_temperature:ensures:TempOK:3"].status == VALID
    assert vs["cbit_check_temperature:ensures:TempOK:4"].status == VALID


def test_acquisition_valid_with_loop_invariants():
    vs = verify_function(TP, ACQ, DC)
    assert {v.status for v in vs} == {VALID}
    assert {v.kind for v in vs} >= {LOOP_INIT, LOOP_PRESERVE, FRAME}


def test_real_quantifier_goal_is_unknown():
    tp = prog("""
    module u;
    /*@ ensures \\forall real x; x > 0.0 ==> x + 1.0 > x; @*/
    void f(int32_t a);
    void f(int32_t a) { }
    """)
    [v] = verify_function(tp, "f", DomainConfig.from_dict({"domains": {"f.a": {"range": [0, 3]}}}))
    assert v.status == UNKNOWN


def test_time_budget_gives_timeout():
    dc = DC.replace(budget_ms=1)
    vs = verify_function(TP, SETTER, dc)
    assert TIMEOUT in {v.status for v in vs}
    assert FAILED not in {v.status for v in vs}


def test_state_limit_gives_timeout():
    vs = by_id(verify_function(TP, SETTER, DC.replace(max_states=10)))
    assert vs["cbit_set_work_cond:complete"].status == TIMEOUT
    assert vs["cbit_set_work_cond:ensures:NoCommand:0"].status == VALID


def test_runtime_error_is_a_failure():
    tp = prog("""
    module z;
    /*@ ensures \\result == 1; @*/
    int32_t f(int32_t a);
    int32_t f(int32_t a) { return 10 / a; }
    """)
    [v] = verify_function(tp, "f", DomainConfig.from_dict({"domains": {"f.a": {"range": [0, 3]}}}))
    assert v.status == FAILED and v.counterexample == {"a": 0}
    assert "DivisionByZero" in v.detail


def test_failed_assertion_and_invariant_reported():
    tp = prog("""
    module a;
    static int32_t s = 0;
    /*@ ensures \\true; @*/
    void f(int32_t n);
    void f(int32_t n) {
      int32_t i = 0;
      //@ assert n != 2;
      //@ loop invariant i <= 2;
      while (i < n) { i = i + 1; }
    }
    """)
    dc = DomainConfig.from_dict({"domains": {"f.n": {"range": [0, 4]}}})
    vs = {v.kind: v for v in verify_function(tp, "f", dc)}
    assert vs[ASSERTION].status == FAILED and vs[ASSERTION].counterexample == {"n": 2}
    assert vs[LOOP_INIT].status == VALID
    assert vs[LOOP_PRESERVE].status == FAILED and vs[LOOP_PRESERVE].counterexample == {"n": 3}
    for ob in gen_obligations(tp, "f"):
        v = check_obligation(tp, ob, dc)
        if v.status == FAILED:
            assert replay(tp, ob, dc, v.counterexample)


def test_first_counterexample_is_lexicographically_first():
    tp = prog("""
    module f;
    /*@ ensures \\result != 7; @*/
    int32_t f(int32_t a, int32_t b);
    int32_t f(int32_t a, int32_t b) { return a + b; }
    """)
    dc = DomainConfig.from_dict({"domains": {"f.a": {"range": [0, 9]}, "f.b": {"range": [0, 9]}}})
    [v] = verify_function(tp, "f", dc)
    assert v.counterexample == {"a": 0, "b": 7}


def test_verdicts_are_deterministic():
    assert verify_function(TP, CHECK, DC) == verify_function(TP, CHECK, DC)


def test_shrinking_domains_keeps_valid_verdicts():
    full = by_id(verify_function(TP, SETTER, small_setter_dc()))
    for sub in ([0], [65535], [2, 3]):
        dc = DC.with_domains(**{"cbit_set_work_cond.new_cond": {"values": sub}})
        for v in verify_function(TP, SETTER, dc):
            if full[v.id].status == VALID:
                assert v.status == VALID


def test_coupling_is_what_makes_the_entry_assertion_hold():
    dc = small_setter_dc().replace(coupling=[])
    vs = by_id(verify_function(TP, SETTER, dc))
    v = next(v for v in vs.values() if v.kind == ASSERTION)
    assert v.status == FAILED
    assert v.counterexample["gWorkCond"] != v.counterexample["cbit::WorkCondition"]


# -- completeness and disjointness ----------------------------------------------------------

def test_setter_behaviors_complete_and_disjoint():
    complete, disjoint = check_behavior_sets(TP, SETTER, DC)
    assert complete.status == VALID and disjoint.status == VALID


def _without_behavior(name: str) -> str:
    text = (ROOT / "cbit.mc").read_text()
    pattern = re.compile(rf"  @ behavior {name}:\n(?:  @  .*\n)+?(?=  @ (?:behavior|complete))")
    out, n = pattern.subn("", text)
    assert n == 1
    return out


@pytest.mark.parametrize("name", ["NoCommand", "ModifyWC", "KeepWC"])
def test_deleting_a_behavior_breaks_completeness(name, tmp_path):
    src = tmp_path / "cbit.mc"
    src.write_text(_without_behavior(name))
    tp = load_program([src, ROOT / "acq.mc", ROOT / "adc.mc"])
    complete, disjoint = check_behavior_sets(tp, SETTER, DC)
    assert complete.status == FAILED and disjoint.status == VALID
    w = complete.counterexample
    nocmd = w["new_cond"] == C["NCD_NO_COMMAND"]
    idle = w["gWorkCond"] == C["NCD_IDLE_EMIT"]
    expected = {"NoCommand": nocmd, "ModifyWC": idle and not nocmd,
                "KeepWC": not idle and not nocmd}
    assert expected[name]
    if name == "NoCommand":
        assert w["gWorkCond"] != C["NCD_IDLE_EMIT"] or nocmd


def test_duplicated_guard_breaks_disjointness():
    tp = prog("""
    module d;
    /*@ behavior A: assumes a > 0;
      @ behavior B: assumes a > 0;
      @ behavior C: assumes a <= 0;
      @ complete behaviors; disjoint behaviors; @*/
    void f(int32_t a);
    void f(int32_t a) { }
    """)
    complete, disjoint = check_behavior_sets(
        tp, "f", DomainConfig.from_dict({"domains": {"f.a": {"range": [-2, 2]}}}))
    assert complete.status == VALID
    assert disjoint.status == FAILED and disjoint.counterexample == {"a": 1}


OPS = {"==": operator.eq, "!=": operator.ne, "<": operator.lt, "<=": operator.le,
       ">": operator.gt, ">=": operator.ge}
VARS = ("a", "b", "g")

atom = st.tuples(st.sampled_from(VARS), st.sampled_from(sorted(OPS)), st.integers(-1, 8))
guard = st.lists(atom, min_size=1, max_size=2)
domain = st.lists(st.integers(-2, 9), min_size=1, max_size=8, unique=True)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.lists(guard, min_size=1, max_size=4), domain, domain, domain)
def test_behavior_sets_agree_with_brute_force(guards, da, db, dg):
    lines = []
    for i, g in enumerate(guards):
        text = " && ".join(f"{v} {op} {k}" for v, op, k in g)
        lines.append(f"  @ behavior B{i}: assumes {text};")
    src = ("module o;\n//@ ghost int32_t g = 0;\n/*@\n" + "\n".join(lines)
           + "\n  @ complete behaviors; disjoint behaviors;\n  @*/\n"
           "void f(int32_t a, int32_t b);\nvoid f(int32_t a, int32_t b) { }\n")
    tp = prog(src)
    dc = DomainConfig.from_dict({"domains": {"f.a": {"values": da}, "f.b": {"values": db},
                                             "g": {"values": dg}}})
    complete, disjoint = check_behavior_sets(tp, "f", dc)
    preds = [lambda p, g=g: all(OPS[op](p[v], k) for v, op, k in g) for g in guards]
    want_c, want_d = brute_force_behavior_sets(preds, {"a": da, "b": db, "g": dg})
    assert (complete.status == VALID) == want_c
    assert (disjoint.status == VALID) == want_d
    if complete.status == FAILED:
        assert not any(p(complete.counterexample) for p in preds)
    if disjoint.status == FAILED:
        assert sum(p(disjoint.counterexample) for p in preds) >= 2


def test_behavior_sets_need_named_behaviors():
    with pytest.raises(VerifierError):
        check_behavior_sets(TP, ACQ, DC)


# -- frames -------------------------------------------------------------------------------------

def test_frame_fails_without_module_variable():
    v = check_frame(load_variant("assigns_ghost_only"), SETTER, DC)
    assert v.status == FAILED
    assert "cbit::WorkCondition" in v.detail


def test_frame_valid_with_qualified_module_variable():
    assert check_frame(load_variant("assigns_qualified"), SETTER, DC).status == VALID


def test_nothing_frame_on_pure_function():
    tp = prog("""
    module p;
    static int32_t s = 0;
    /*@ assigns \\nothing; @*/
    int32_t f(int32_t a);
    int32_t f(int32_t a) { return a + s; }
    """)
    dc = DomainConfig.from_dict({"domains": {"f.a": {"range": [0, 3]}, "p::s": {"range": [0, 2]}}})
    assert check_frame(tp, "f", dc).status == VALID


def test_frame_needs_assigns():
    with pytest.raises(VerifierError):
        check_frame(TP, SETTER, DC)


# -- coverage lint ---------------------------------------------------------------------------

def test_coverage_reports_work_condition_gap():
    gaps = {g.output: g for g in output_coverage(TP, CHECK, DC)}
    assert set(gaps) == {"gWorkCond", "cbit::WorkCondition"}
    w = gaps["gWorkCond"].witness
    # an agreeing pair of readings, yet no applicable ensures pins the working condition
    t1, t2 = w["acq_measure_temp.temp1"], w["acq_measure_temp.temp2"]
    assert abs(t1 - t2) <= C["TEMP_FAIL"]
    assert 0 < gaps["gWorkCond"].count <= gaps["gWorkCond"].total


def test_coverage_clean_on_fixed_variant():
    assert output_coverage(load_variant("coverage_fixed"), CHECK, DC) == []


def test_coverage_clean_on_setter_and_acquisition():
    assert output_coverage(TP, SETTER, DC) == []
    assert output_coverage(TP, ACQ, DC) == []


def test_coverage_of_function_writing_nothing():
    tp = prog("module n;\n/*@ ensures \\true; @*/\nvoid f(int32_t a);\nvoid f(int32_t a) { }\n")
    assert output_coverage(tp, "f", DomainConfig.from_dict({"domains": {"f.a": {"values": [1]}}})) == []


# -- report -----------------------------------------------------------------------------------

def test_summary_rows():
    report = summarize({SETTER: verify_function(TP, SETTER, DC), "adc_read": None})
    row = report.rows[0]
    assert row.counts == (6, 6, 0, 0, 0)
    assert report.rows[1].counts is None
    text = report.to_text()
    assert re.search(r"cbit_set_work_cond\s+6\s+6\s+0\s+0\s+0", text)
    assert re.search(r"adc_read\s+-\s+-\s+-\s+-\s+-", text)


def test_empty_summary():
    assert summarize({}).totals == (0, 0, 0, 0, 0)


def test_report_json_round_trip_and_shape():
    report = verify_program(TP, DC, [SETTER, "adc_read"], coverage=False)
    data = report.to_dict()
    assert set(data) >= {"functions", "assumptions"}
    f = data["functions"][0]
    assert set(f) >= {"name", "scheduled", "valid", "failed", "unknown", "timeout", "obligations"}
    again = type(report).from_json(report.to_json())
    assert again.to_json() == report.to_json()
    assert "coupling: gWorkCond == cbit::WorkCondition" in data["assumptions"]


# -- scenarios -------------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_corpus_scenarios_pass(name):
    res = run_scenario(TP, SCENARIOS[name], DC)
    assert res.passed, res.first_failure


def test_empty_scenario_keeps_initial_state():
    res = run_scenario(TP, Scenario.from_dict({"steps": []}), DC)
    assert res.passed and res.steps == ()


def test_failed_expectation_is_reported_with_its_step():
    sc = Scenario.from_dict({"steps": [
        {"call": "cbit_set_work_cond", "args": {"new_cond": "NCD_TEMP_LOW"},
         "expect": ["gWorkCond == NCD_TEMP_HIGH"]}]})
    res = run_scenario(TP, sc, DC)
    assert not res.passed and res.first_failure.index == 0


def test_hardware_call_without_stub_is_reported():
    sc = Scenario.from_dict({"steps": [{"call": "cbit_check_temperature"}]})
    with pytest.raises(StubMissing):
        run_scenario(TP, sc)


def test_unknown_scenario_keys_are_rejected():
    with pytest.raises(ConfigError):
        Scenario.from_dict({"steps": [], "extra": 1})
