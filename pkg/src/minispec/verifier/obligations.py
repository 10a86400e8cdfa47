"""Proof obligations generated from a function's contract and annotations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from minispec.errors import HardwareFunction
from minispec.frontend.ast import (
    BOOL, Assert, Binary, BoolLit, Expr, For, SourceSpan, While, NOSPAN,
)
from minispec.frontend.printer import expr_text
from minispec.frontend.walk import iter_stmts

ENSURES = "BehaviorEnsures"
COMPLETE = "Completeness"
DISJOINT = "Disjointness"
ASSERTION = "Assertion"
LOOP_INIT = "LoopInvariantInit"
LOOP_PRESERVE = "LoopInvariantPreserve"
FRAME = "Frame"

KINDS = (ENSURES, COMPLETE, DISJOINT, ASSERTION, LOOP_INIT, LOOP_PRESERVE, FRAME)


@dataclass(frozen=True)
class Obligation:
    id: str
    kind: str
    function: str
    expr: Optional[Expr] = None
    behavior: Optional[str] = None
    index: Optional[int] = None
    span: SourceSpan = NOSPAN
    # spans of the annotation expressions whose runtime failures count against this goal
    watch: Tuple[SourceSpan, ...] = ()

    @property
    def text(self) -> str:
        if self.kind == FRAME:
            return "frame"
        return expr_text(self.expr) if self.expr is not None else ""


def conj(exprs) -> Expr:
    exprs = list(exprs)
    if not exprs:
        return BoolLit(True, ty=BOOL)
    out = exprs[0]
    for e in exprs[1:]:
        out = Binary("&&", out, e, out.span, BOOL, True)
    return out


def disj(exprs) -> Expr:
    exprs = list(exprs)
    if not exprs:
        return BoolLit(False, ty=BOOL)
    out = exprs[0]
    for e in exprs[1:]:
        out = Binary("||", out, e, out.span, BOOL, True)
    return out


def _at(span: SourceSpan) -> str:
    return f"{span.line_start}:{span.col_start}"


def behavior_set_obligations(fn) -> Tuple[Obligation, Obligation]:
    """Completeness and disjointness goals over the named behaviors' assumes."""
    named = fn.contract.named_behaviors() if fn.contract else ()
    guards = [conj(b.assumes) for b in named]
    complete = Obligation(f"{fn.name}:complete", COMPLETE, fn.name, disj(guards),
                          span=fn.contract.span if fn.contract else NOSPAN)
    pairs = [Binary("&&", a, b, NOSPAN, BOOL, True)
             for i, a in enumerate(guards) for b in guards[i + 1:]]
    disjoint = Obligation(f"{fn.name}:disjoint", DISJOINT, fn.name,
                          _not(disj(pairs)), span=fn.contract.span if fn.contract else NOSPAN)
    return complete, disjoint


def _not(e: Expr) -> Expr:
    from minispec.frontend.ast import Unary
    return Unary("!", e, e.span, BOOL)


def frame_obligation(fn) -> Obligation:
    return Obligation(f"{fn.name}:frame", FRAME, fn.name, None,
                      span=fn.contract.span if fn.contract else fn.span)


def gen_obligations(tp, fn_name: str) -> List[Obligation]:
    fn = tp.function(fn_name)
    if fn.hardware:
        raise HardwareFunction(fn_name)
    obs: List[Obligation] = []
    c = fn.contract
    if c is not None:
        for b in c.behaviors:
            for i, e in enumerate(b.ensures):
                obs.append(Obligation(f"{fn.name}:ensures:{b.name}:{i}", ENSURES, fn.name, e,
                                      behavior=b.name, index=i, span=e.span))
        complete, disjoint = behavior_set_obligations(fn)
        if c.complete_declared:
            obs.append(complete)
        if c.disjoint_declared:
            obs.append(disjoint)
    if fn.body is not None:
        for s in iter_stmts(fn.body):
            if isinstance(s, Assert):
                obs.append(Obligation(f"{fn.name}:assert@{_at(s.expr.span)}", ASSERTION,
                                      fn.name, s.expr, span=s.expr.span, watch=(s.expr.span,)))
            elif isinstance(s, (While, For)) and s.invariants:
                inv = conj(s.invariants)
                watch = tuple(e.span for e in s.invariants)
                obs.append(Obligation(f"{fn.name}:loop_init@{_at(s.span)}", LOOP_INIT, fn.name,
                                      inv, span=s.span, watch=watch))
                obs.append(Obligation(f"{fn.name}:loop_preserve@{_at(s.span)}", LOOP_PRESERVE,
                                      fn.name, inv, span=s.span, watch=watch))
    if c is not None and c.assigns is not None:
        obs.append(frame_obligation(fn))
    return obs
