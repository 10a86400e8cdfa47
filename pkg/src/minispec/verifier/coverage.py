"""Output-coverage lint.

An output is a location the function can write: module and ghost variables
assigned by its body or by non-stubbed callees, its out parameters and its
result.  An output is *uncovered* at an input point when no applicable ensures
clause mentions it in the post-state (mentions under ``\\old`` do not count;
a mention of a coupled partner does).  An ensures clause is applicable when its
behavior's assumes hold and, for a clause of the form ``P ==> Q``, when ``P``
holds after the call.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Set

from minispec.errors import CalledHardwareFunction, EvalError, StubMissing, VerifierError
from minispec.frontend.ast import Assign, Binary, Deref, Index, Name, Old, Result
from minispec.frontend.walk import children, iter_nodes
from minispec.verifier.config import DomainConfig
from minispec.verifier.engine import Problem, state_label
from minispec.verifier.obligations import conj
from minispec.verifier.stubs import state_names

RESULT = "\\result"


@dataclass(frozen=True)
class CoverageGap:
    output: str
    witness: Mapping[str, Any]
    count: int
    total: int


def _root(target) -> Name:
    while isinstance(target, Index):
        target = target.base
    return target


def outputs(tp, fn_name: str, problem: Optional[Problem] = None) -> List[str]:
    """Writable locations of ``fn_name`` (state names, ``*out`` and ``\\result``)."""
    fn = tp.function(fn_name)
    bodies = [fn.body] if fn.body is not None else []
    stubbed = problem.stub_specs if problem is not None else {}
    for n in (problem.reach if problem is not None else ()):
        if n not in stubbed and tp.function(n).body is not None:
            bodies.append(tp.function(n).body)
    state: Set[str] = set()
    outs: List[str] = []
    for body in bodies:
        for node in iter_nodes(body):
            if not isinstance(node, Assign):
                continue
            t = _root(node.target)
            if isinstance(t, Name) and t.binding in ("module", "ghost"):
                state.add(t.ident)
            elif isinstance(t, Deref) and body is fn.body and "*" + t.target.ident not in outs:
                outs.append("*" + t.target.ident)
    result = [RESULT] if fn.ret.name != "void" else []
    return sorted(state, key=lambda n: state_label(tp, n)) + outs + result


def _post_mentions(e) -> Set[str]:
    found: Set[str] = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Old):
            continue
        if isinstance(n, Name) and n.binding in ("module", "ghost"):
            found.add(n.ident)
        elif isinstance(n, Deref):
            found.add("*" + n.target.ident)
            continue
        elif isinstance(n, Result):
            found.add(RESULT)
        stack.extend(children(n))
    return found


def output_coverage(tp, fn_name: str, dc: DomainConfig) -> List[CoverageGap]:
    """Outputs left unspecified somewhere in the domain, with the first witness point."""
    problem = Problem(tp, fn_name, dc)
    fn = problem.fn
    if problem.cf is None:
        raise VerifierError(f"'{fn_name}' has no body")
    cp = problem.cp
    outs = outputs(tp, fn_name, problem)
    groups = [state_names(e) for _, e in problem.couplings]

    def closure(names: Set[str]) -> Set[str]:
        names = set(names)
        changed = True
        while changed:
            changed = False
            for g in groups:
                if names & g and not g <= names:
                    names |= g
                    changed = True
        return names

    clauses = []
    behaviors = fn.contract.behaviors if fn.contract is not None else ()
    for b in behaviors:
        guard = cp.logic(conj(b.assumes), contract=True) if b.assumes else None
        for e in b.ensures:
            premise = None
            if isinstance(e, Binary) and e.op == "==>":
                premise = cp.logic(e.left, contract=True)
            clauses.append((guard, premise, closure(_post_mentions(e))))

    counts: Dict[str, int] = {o: 0 for o in outs}
    witness: Dict[str, Dict[str, Any]] = {}
    total = 0
    start = time.perf_counter()
    env = problem.pre_env
    for _ in problem.points():
        total += 1
        if total > dc.max_states or (not total & 255
                                     and time.perf_counter() - start > dc.budget_ms / 1000):
            raise VerifierError(f"coverage of '{fn_name}' exceeded its budget")
        guards = {}
        try:
            act, _ctx = problem.execute()
        except (CalledHardwareFunction, StubMissing, EvalError):
            continue
        covered: Set[str] = set()
        for guard, premise, names in clauses:
            if guard is not None:
                if guard not in guards:
                    guards[guard] = bool(guard(env))
                if not guards[guard]:
                    continue
            if premise is not None:
                try:
                    if not premise(act):
                        continue
                except EvalError:
                    pass
            covered |= names
        for o in outs:
            if o not in covered:
                counts[o] += 1
                if o not in witness:
                    witness[o] = problem.counterexample()
    return [CoverageGap(o if o.startswith(("*", "\\")) else state_label(tp, o),
                        witness[o], counts[o], total)
            for o in outs if counts[o]]
