"""Bounded exhaustive checking.

All obligations of one function are checked in a single pass: every domain
point that satisfies the coupling assumptions and the requires clauses is
executed once, and each still-open obligation is evaluated on that run.
Points are visited in lexicographic domain order (state variables sorted by
name, then parameters in declaration order, then stub outputs), so the first
counterexample found is reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from minispec.errors import (
    CalledHardwareFunction, ConfigError, DomainMissing, EvalError, HardwareFunction,
    StubMissing, UnboundedQuantifier, UndefinedName, VerifierError,
)
from minispec.frontend.ast import INT32, UINT16, Deref, Name, Old, Result
from minispec.frontend.parser import parse_logic_expr
from minispec.frontend.resolver import COUPLING, resolve_logic
from minispec.frontend.walk import iter_nodes
from minispec.semantics.compiler import DEFAULT_BUDGET, Context, Env, compiled
from minispec.semantics.values import ModuleState, default_value
from minispec.verifier.config import Domain, DomainConfig
from minispec.verifier.obligations import (
    ASSERTION, COMPLETE, DISJOINT, ENSURES, FRAME, LOOP_INIT, LOOP_PRESERVE, Obligation,
    behavior_set_obligations, conj, frame_obligation, gen_obligations,
)
from minispec.verifier.stubs import (
    active_stubs, ghost_arrays_read, make_stub, output_keys, reachable, state_names,
)

VALID = "Valid"
FAILED = "Failed"
UNKNOWN = "Unknown"
TIMEOUT = "Timeout"
STATUSES = (VALID, FAILED, UNKNOWN, TIMEOUT)

_EXEC_KINDS = (ENSURES, ASSERTION, LOOP_INIT, LOOP_PRESERVE, FRAME)
_FAILURE_KIND = {ASSERTION: "assert", LOOP_INIT: "invariant_init",
                 LOOP_PRESERVE: "invariant_preserve"}


@dataclass(frozen=True)
class Verdict:
    id: str
    status: str
    counterexample: Optional[Mapping[str, Any]] = None
    states_checked: int = 0
    elapsed: float = field(default=0.0, compare=False)
    detail: str = ""
    kind: str = ""
    function: str = ""


@dataclass(frozen=True)
class Dim:
    label: str
    kind: str              # state | elem | param | stub
    target: Any            # name | (array, index) | position | (function, output)
    domain: Domain


def _type_range(ty) -> Optional[Tuple[int, int]]:
    if ty == UINT16:
        return 0, 0xFFFF
    if ty == INT32:
        return -2**31, 2**31 - 1
    return None


def _check_values(label: str, ty, dom: Domain) -> None:
    rng = _type_range(ty.elem if ty.name == "array" else ty)
    for v in dom.values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            if ty.name != "bool":
                raise ConfigError(f"domain {label}: value {v!r} is not a number")
        elif rng is not None and (not isinstance(v, int) or not rng[0] <= v <= rng[1]):
            raise ConfigError(f"domain {label}: value {v!r} does not fit {ty}")


def state_label(tp, name: str) -> str:
    mv = tp.module_var(name)
    return f"{mv.module}::{name}" if mv is not None else name


def resolve_couplings(tp, dc: DomainConfig):
    """Resolved coupling expressions; ones naming variables absent from ``tp`` are skipped."""
    out = []
    for text in dc.coupling:
        try:
            e = resolve_logic(tp, parse_logic_expr(text, "<coupling>"), COUPLING)
        except UndefinedName:
            continue
        out.append((text, e))
    return out


class Problem:
    """Everything needed to enumerate the input space of one function."""

    def __init__(self, tp, fn_name: str, dc: DomainConfig, fixed: Optional[Mapping] = None):
        self.tp = tp
        self.dc = dc
        fn = self.fn = tp.function(fn_name)
        if fn.hardware:
            raise HardwareFunction(fn_name)
        self.cp = compiled(tp)
        self.cf = self.cp.function(fn_name) if fn.body is not None else None
        specs = active_stubs(tp, dc, fn_name)
        self.reach = reachable(tp, fn_name, set(specs))
        self.stub_specs = {n: specs[n] for n in self.reach if n in specs}
        self.unstubbed = [n for n in self.reach if n not in self.stub_specs
                          and (tp.function(n).hardware or tp.function(n).body is None)]

        footprint = set()
        if fn.contract is not None:
            footprint |= state_names(fn.contract)
        if fn.body is not None:
            footprint |= state_names(fn.body)
        for n in self.reach:
            if n not in self.stub_specs and tp.function(n).body is not None:
                footprint |= state_names(tp.function(n).body)
        footprint |= ghost_arrays_read(self.stub_specs)
        couplings = resolve_couplings(tp, dc)
        relevant = []
        changed = True
        while changed:
            changed = False
            for text, e in couplings:
                names = state_names(e)
                if names & footprint and (text, e) not in relevant:
                    relevant.append((text, e))
                    footprint |= names
                    changed = True
        self.couplings = [(t, e) for t, e in couplings if (t, e) in relevant]
        self.footprint = footprint

        consts = tp.const_values
        dims: List[Dim] = []
        state_dims = []
        for name in footprint:
            decl = tp.module_var(name) or tp.ghost(name)
            label = state_label(tp, name)
            if decl.type.name == "array":
                for i, dom in self.dc.element_domains(name):
                    if not 0 <= i < decl.type.size:
                        raise ConfigError(f"domain {name}[{i}]: index out of bounds")
                    dom = dom.bind(consts, f"{name}[{i}]")
                    _check_values(f"{name}[{i}]", decl.type, dom)
                    state_dims.append(Dim(f"{name}[{i}]", "elem", (name, i), dom))
                continue
            module = decl.module if tp.module_var(name) is not None else None
            dom = dc.state_domain(name, module)
            if dom is not None:
                dom = dom.bind(consts, label)
                _check_values(label, decl.type, dom)
                state_dims.append(Dim(label, "state", name, dom))
        dims.extend(sorted(state_dims, key=lambda d: (d.label, d.target if d.kind == "state"
                                                      else d.target[1])))
        pos = 0
        for p in fn.params:
            if p.out:
                continue
            dom = dc.param_domain(fn.name, p.name)
            if dom is None:
                raise DomainMissing(f"{fn.name}.{p.name}")
            dom = dom.bind(consts, p.name)
            _check_values(p.name, p.type, dom)
            dims.append(Dim(p.name, "param", pos, dom))
            pos += 1
        for n in self.reach:
            spec = self.stub_specs.get(n)
            if spec is None or spec.kind != "outputs":
                continue
            for out, dom in output_keys(tp, n, spec):
                dims.append(Dim(f"{n}.{out}", "stub", (n, out), dom.bind(consts, f"{n}.{out}")))
        if fixed is not None:
            missing = [d.label for d in dims if d.label not in fixed]
            if missing:
                raise ConfigError(f"counterexample lacks {missing}")
            dims = [Dim(d.label, d.kind, d.target, Domain((fixed[d.label],))) for d in dims]
        self.dims = dims

        # mutable point
        self.base = ModuleState.initial(tp).merged()
        self.state = dict(self.base)
        self.argvals: List[Any] = [None] * pos
        self.args: Dict[str, Any] = {}
        self.value_params = [p.name for p in fn.params if not p.out]
        self.out_defaults = {p.name: default_value(p.type) for p in fn.params if p.out}
        self.stub_point: Dict[Tuple[str, str], Any] = {}
        self.stubs = {n: make_stub(tp, n, s, self.stub_point) for n, s in self.stub_specs.items()}
        self.cur: List[Any] = [None] * len(dims)
        self.pre_env = Env(self.state, Context(), args=self.args, locals_=self.args)

        # pruning checks, placed after the deepest dimension they depend on
        self.checks: List[List[Callable]] = [[] for _ in dims]
        self.root_checks: List[Callable] = []
        for _, e in self.couplings:
            deps = self._deps(e)
            if deps:
                self.checks[max(deps)].append(self.cp.logic(e))
        if fn.contract is not None:
            for r in fn.contract.requires:
                deps = self._deps(r)
                f = self.cp.logic(r, contract=True)
                (self.checks[max(deps)] if deps else self.root_checks).append(f)

    def _deps(self, e) -> List[int]:
        names = state_names(e)
        params = {n.ident for n in iter_nodes(e) if isinstance(n, Name) and n.binding == "param"}
        out = []
        for k, d in enumerate(self.dims):
            if d.kind == "state" and d.target in names:
                out.append(k)
            elif d.kind == "elem" and d.target[0] in names:
                out.append(k)
            elif d.kind == "param" and d.label in params:
                out.append(k)
        return out

    def _applier(self, k: int):
        d = self.dims[k]
        cur, state = self.cur, self.state
        if d.kind == "state":
            name = d.target

            def apply(v):
                cur[k] = v
                state[name] = v
        elif d.kind == "elem":
            name, i = d.target

            def apply(v):
                cur[k] = v
                arr = state[name]
                state[name] = arr[:i] + (v,) + arr[i + 1:]
        elif d.kind == "param":
            pos, pname, argvals, args = d.target, d.label, self.argvals, self.args

            def apply(v):
                cur[k] = v
                argvals[pos] = v
                args[pname] = v
        else:
            key, sp = d.target, self.stub_point

            def apply(v):
                cur[k] = v
                sp[key] = v
        return apply

    @property
    def size(self) -> int:
        n = 1
        for d in self.dims:
            n *= len(d.domain)
        return n

    def counterexample(self) -> Dict[str, Any]:
        return {d.label: v for d, v in zip(self.dims, self.cur)}

    def points(self) -> Iterator[None]:
        """Visit every point that satisfies coupling and requires (state is updated in place)."""
        env = self.pre_env
        if not all(c(env) for c in self.root_checks):
            return
        n = len(self.dims)
        if n == 0:
            yield None
            return
        appliers = [self._applier(k) for k in range(n)]
        values = [d.domain.values for d in self.dims]
        checks = self.checks

        def rec(k):
            apply, chk = appliers[k], checks[k]
            last = k == n - 1
            for v in values[k]:
                apply(v)
                if chk:
                    ok = True
                    for c in chk:
                        if not c(env):
                            ok = False
                            break
                    if not ok:
                        continue
                if last:
                    yield None
                else:
                    yield from rec(k + 1)
        yield from rec(0)

    def execute(self, step_budget: int = DEFAULT_BUDGET) -> Tuple[Env, Context]:
        work = dict(self.state)
        outbox = dict(self.out_defaults)
        refs = {o: (outbox, o) for o in outbox}
        ctx = Context(step_budget, stubs=self.stubs)
        act = self.cf.invoke(ctx, work, tuple(self.argvals), refs, top=True)
        return act, ctx


def _goal_detail(problem: Problem, e, env: Env) -> str:
    """Post-state values of the locations a goal mentions."""
    parts = []
    seen = set()
    for n in iter_nodes(e):
        if isinstance(n, Old):
            continue
        label = None
        if isinstance(n, Name) and n.binding in ("module", "ghost") and n.ident not in seen:
            seen.add(n.ident)
            label, value = state_label(problem.tp, n.ident), env.state.get(n.ident)
        elif isinstance(n, Result) and "\\result" not in seen:
            seen.add("\\result")
            label, value = "\\result", env.result
        elif isinstance(n, Deref) and "*" + n.target.ident not in seen:
            seen.add("*" + n.target.ident)
            cont, key = env.outs[n.target.ident]
            label, value = "*" + n.target.ident, cont[key]
        if label is not None:
            parts.append(f"{label}={value!r}")
    return "post: " + ", ".join(parts) if parts else ""


class _Open:
    __slots__ = ("ob", "status", "count", "cex", "detail", "elapsed", "goal", "behavior")

    def __init__(self, ob: Obligation):
        self.ob = ob
        self.status = None
        self.count = 0
        self.cex = None
        self.detail = ""
        self.elapsed = 0.0
        self.goal = None
        self.behavior = -1


def run_batch(tp, fn_name: str, obligations: Sequence[Obligation], dc: DomainConfig,
              fixed: Optional[Mapping[str, Any]] = None) -> List[Verdict]:
    start = time.perf_counter()
    problem = Problem(tp, fn_name, dc, fixed)
    fn = problem.fn
    cp = problem.cp
    obs = [_Open(o) for o in obligations]
    named = fn.contract.named_behaviors() if fn.contract is not None else ()
    bnames = [b.name for b in named]
    guards = [cp.logic(conj(b.assumes), contract=True) for b in named]
    for o in obs:
        if o.ob.kind == ENSURES:
            o.goal = cp.logic(o.ob.expr, contract=True)
            if o.ob.behavior in bnames:
                o.behavior = bnames.index(o.ob.behavior)
    if fn.contract is not None and fn.contract.assigns is not None:
        allowed = {t.ident for t in fn.contract.assigns if isinstance(t, Name)}
    else:
        allowed = set()
    frame_keys = [k for k in problem.base if k not in allowed]
    failure_map: Dict[Tuple[str, Any], List[_Open]] = {}
    for o in obs:
        if o.ob.kind in _FAILURE_KIND:
            for sp in o.ob.watch:
                failure_map.setdefault((_FAILURE_KIND[o.ob.kind], sp), []).append(o)

    needs_exec = [o for o in obs if o.ob.kind in _EXEC_KINDS]
    if needs_exec and problem.cf is None:
        for o in needs_exec:
            o.status, o.detail = UNKNOWN, f"'{fn_name}' has no body"
    if problem.unstubbed:
        for o in needs_exec:
            if o.status is None:
                o.status = UNKNOWN
                o.detail = "no stub for " + ", ".join(problem.unstubbed)

    budget_s = dc.budget_ms / 1000.0
    max_states = dc.max_states
    env = problem.pre_env
    npts = 0
    open_count = sum(1 for o in obs if o.status is None)

    def decide(o: _Open, status: str, detail: str = "", cex: bool = False):
        nonlocal open_count
        o.status = status
        o.detail = detail
        o.elapsed = time.perf_counter() - start
        if cex:
            o.cex = problem.counterexample()
        open_count -= 1

    def tick(o: _Open) -> bool:
        if o.count >= max_states:
            decide(o, TIMEOUT, f"state limit of {max_states} reached")
            return False
        o.count += 1
        return True

    try:
        for _ in problem.points():
            if open_count == 0:
                break
            npts += 1
            if not npts & 255 and time.perf_counter() - start > budget_s:
                for o in obs:
                    if o.status is None:
                        decide(o, TIMEOUT, f"time budget of {dc.budget_ms} ms exhausted")
                break
            active = [bool(g(env)) for g in guards]
            run = False
            for o in obs:
                if o.status is not None:
                    continue
                k = o.ob.kind
                if k == COMPLETE:
                    if tick(o) and not any(active):
                        decide(o, FAILED, "no behavior's assumes hold", cex=True)
                elif k == DISJOINT:
                    if tick(o) and sum(active) > 1:
                        hits = [bnames[i] for i, a in enumerate(active) if a]
                        decide(o, FAILED, "overlapping behaviors: " + ", ".join(hits), cex=True)
                elif k == ENSURES:
                    if o.behavior < 0 or active[o.behavior]:
                        run = True
                else:
                    run = True
            if not run:
                continue
            try:
                act, ctx = problem.execute()
            except (CalledHardwareFunction, StubMissing) as exc:
                for o in obs:
                    if o.status is None and o.ob.kind in _EXEC_KINDS:
                        decide(o, UNKNOWN, exc.message)
                continue
            except EvalError as exc:
                for o in obs:
                    if o.status is None and o.ob.kind in _EXEC_KINDS and (
                            o.ob.kind != ENSURES or o.behavior < 0 or active[o.behavior]):
                        if tick(o):
                            decide(o, FAILED, f"runtime error: {type(exc).__name__}: "
                                              f"{exc.message}", cex=True)
                continue
            fails = {}
            for f in ctx.failures:
                if f.function == fn_name:
                    fails.setdefault((f.kind, f.span), f)
            for o in obs:
                if o.status is not None:
                    continue
                k = o.ob.kind
                if k == ENSURES:
                    if o.behavior >= 0 and not active[o.behavior]:
                        continue
                    if not tick(o):
                        continue
                    try:
                        ok = o.goal(act)
                    except UnboundedQuantifier as exc:
                        decide(o, UNKNOWN, exc.message)
                        continue
                    except EvalError as exc:
                        decide(o, FAILED, f"evaluation error: {type(exc).__name__}: "
                                          f"{exc.message}", cex=True)
                        continue
                    if not ok:
                        decide(o, FAILED, _goal_detail(problem, o.ob.expr, act), cex=True)
                elif k in _FAILURE_KIND:
                    if not tick(o):
                        continue
                    kind = _FAILURE_KIND[k]
                    hit = next((fails[(kind, sp)] for sp in o.ob.watch if (kind, sp) in fails),
                               None)
                    if hit is not None:
                        if hit.detail.startswith("UnboundedQuantifier"):
                            decide(o, UNKNOWN, hit.detail)
                        else:
                            decide(o, FAILED, hit.render(), cex=True)
                elif k == FRAME:
                    if not tick(o):
                        continue
                    post = act.state
                    pre = problem.state
                    changed = [key for key in frame_keys if post[key] != pre[key]]
                    if changed:
                        desc = ", ".join(f"{state_label(problem.tp, key)}: {pre[key]!r} -> "
                                         f"{post[key]!r}" for key in changed)
                        decide(o, FAILED, "modified outside assigns: " + desc, cex=True)
    except UnboundedQuantifier as exc:
        for o in obs:
            if o.status is None:
                decide(o, UNKNOWN, f"assumption not enumerable: {exc.message}")
    except EvalError as exc:
        for o in obs:
            if o.status is None:
                decide(o, UNKNOWN, f"assumption could not be evaluated: {exc.message}")

    end = time.perf_counter() - start
    verdicts = []
    for o in obs:
        status = o.status or VALID
        verdicts.append(Verdict(
            id=o.ob.id, status=status, counterexample=o.cex if status == FAILED else None,
            states_checked=o.count, elapsed=o.elapsed if o.status else end,
            detail=o.detail, kind=o.ob.kind, function=fn_name,
        ))
    return verdicts


# -- public operations ------------------------------------------------------------------------

def verify_function(tp, fn_name: str, dc: DomainConfig) -> List[Verdict]:
    obs = gen_obligations(tp, fn_name)
    if not obs:
        return []
    return run_batch(tp, fn_name, obs, dc)


def check_obligation(tp, ob: Obligation, dc: DomainConfig) -> Verdict:
    return run_batch(tp, ob.function, [ob], dc)[0]


def check_behavior_sets(tp, fn_name: str, dc: DomainConfig) -> Tuple[Verdict, Verdict]:
    fn = tp.function(fn_name)
    if fn.contract is None or not fn.contract.named_behaviors():
        raise VerifierError(f"'{fn_name}' has no named behaviors")
    complete, disjoint = behavior_set_obligations(fn)
    v = run_batch(tp, fn_name, [complete, disjoint], dc)
    return v[0], v[1]


def check_frame(tp, fn_name: str, dc: DomainConfig) -> Verdict:
    fn = tp.function(fn_name)
    if fn.contract is None or fn.contract.assigns is None:
        raise VerifierError(f"'{fn_name}' has no assigns clause")
    return run_batch(tp, fn_name, [frame_obligation(fn)], dc)[0]


def replay(tp, ob: Obligation, dc: DomainConfig, cex: Mapping[str, Any]) -> bool:
    """Re-run a counterexample through the plain interpreter; True if the goal fails again."""
    from minispec.semantics import Snapshot, eval_logic, exec_function

    problem = Problem(tp, ob.function, dc, fixed=cex)
    fn = problem.fn
    values = problem.base
    args: Dict[str, Any] = {}
    outputs: Dict[Tuple[str, str], Any] = {}
    for d in problem.dims:
        v = cex[d.label]
        if d.kind == "state":
            values[d.target] = v
        elif d.kind == "elem":
            name, i = d.target
            arr = values[name]
            values[name] = arr[:i] + (v,) + arr[i + 1:]
        elif d.kind == "param":
            args[d.label] = v
        else:
            outputs[d.target] = v
    pre_state = ModuleState.split(tp, values)
    pre_env = dict(values)
    pre_env.update(args)
    snap = Snapshot(values, args)
    c = fn.contract

    def holds(e, env=pre_env, **kw) -> bool:
        return bool(eval_logic(tp, e, env, **kw))

    if c is not None and not all(holds(r) for r in c.requires):
        return False
    if ob.kind in (COMPLETE, DISJOINT):
        return not holds(ob.expr)
    if ob.kind == ENSURES and ob.behavior in {b.name for b in c.named_behaviors()}:
        b = next(b for b in c.behaviors if b.name == ob.behavior)
        if not all(holds(a) for a in b.assumes):
            return False
    stubs = {n: make_stub(tp, n, s, outputs) for n, s in problem.stub_specs.items()}
    try:
        res = exec_function(tp, fn.name, args, pre_state, stubs=stubs, trace=False)
    except (CalledHardwareFunction, StubMissing):
        return False
    except EvalError:
        return True
    post = res.post_state.merged()
    if ob.kind == ENSURES:
        env = dict(post)
        env.update({"*" + k: v for k, v in res.out_params.items()})
        try:
            return not holds(ob.expr, env, snap=snap, result=res.return_value)
        except UnboundedQuantifier:
            return False
        except EvalError:
            return True
    if ob.kind == FRAME:
        allowed = {t.ident for t in c.assigns if isinstance(t, Name)}
        return any(post[k] != values[k] for k in values if k not in allowed)
    kind = _FAILURE_KIND[ob.kind]
    return any(f.kind == kind and f.span in ob.watch and f.function == fn.name
               for f in res.assertion_failures)
