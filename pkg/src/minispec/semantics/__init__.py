"""Deterministic interpreter for resolved programs, with ghost state and snapshots."""

from __future__ import annotations

from dataclasses import replace
from typing import Any, Mapping, Optional, Sequence, Union

from minispec.errors import CalledHardwareFunction, EvalError, GhostLeak
from minispec.frontend.ast import (
    Assert, Assign, Block, For, FunctionDef, If, Name, Result, While,
)
from minispec.frontend.walk import iter_nodes
from minispec.semantics.compiler import DEFAULT_BUDGET, Context, Env, Stub, compiled
from minispec.semantics.values import (
    AssertionFailure, ExecResult, ModuleState, Snapshot, default_value,
)

__all__ = ["exec_function", "eval_logic", "strip_ghost", "ModuleState", "Snapshot",
           "ExecResult", "AssertionFailure", "DEFAULT_BUDGET", "call_raw"]


def _prepare_args(fn: FunctionDef, args: Union[Mapping[str, Any], Sequence[Any], None]):
    values, outs = [], {}
    if args is None:
        args = {}
    if not isinstance(args, Mapping):
        names = [p.name for p in fn.params if not p.out]
        if len(args) != len(names):
            raise EvalError(f"{fn.name} takes {len(names)} value argument(s), got {len(args)}")
        args = dict(zip(names, args))
    for p in fn.params:
        if p.out:
            outs[p.name] = args.get(p.name, default_value(p.type))
        elif p.name in args:
            values.append(args[p.name])
        else:
            raise EvalError(f"missing argument '{p.name}' for {fn.name}")
    return tuple(values), outs


def call_raw(tp, fn_name: str, argvals: Sequence[Any], state: dict, outbox: dict,
             ctx: Context) -> Env:
    """Run one top-level call in place on ``state``.  Returns the activation.

    The activation carries ``pre`` (entry snapshot), ``args`` (entry values),
    ``outs`` and ``result``, which is what contract evaluation needs.
    """
    cf = compiled(tp).function(fn_name)
    refs = {name: (outbox, name) for name in outbox}
    return cf.invoke(ctx, state, tuple(argvals), refs, top=True)


def exec_function(tp, fn: str, args=None, state: Optional[ModuleState] = None,
                  budget: int = DEFAULT_BUDGET, stubs: Optional[Mapping[str, Stub]] = None,
                  trace: bool = True) -> ExecResult:
    """Execute ``fn`` once on a copy of ``state`` (declared initial state if omitted)."""
    fdef = tp.function(fn)
    if fdef.hardware and not (stubs and fn in stubs):
        raise CalledHardwareFunction(f"'{fn}' is a hardware function")
    if state is None:
        state = ModuleState.initial(tp)
    argvals, outbox = _prepare_args(fdef, args)
    work = state.merged()
    ctx = Context(budget=budget, trace=trace, stubs=stubs)
    env = call_raw(tp, fn, argvals, work, outbox, ctx)
    ghosts = set(state.ghost)
    post = ModuleState({k: v for k, v in work.items() if k not in ghosts},
                       {k: v for k, v in work.items() if k in ghosts})
    return ExecResult(
        return_value=env.result,
        out_params=dict(outbox),
        post_state=post,
        assertion_failures=tuple(ctx.failures),
        trace=tuple(ctx.trace) if ctx.trace is not None else None,
    )


def eval_logic(tp, e, env: Optional[Mapping[str, Any]] = None,
               snap: Optional[Snapshot] = None, result: Any = None):
    """Evaluate a resolved logic expression.

    ``env`` maps names (module/ghost variables, parameters, ``*out`` values) to
    values; ``snap`` supplies ``\\old``/``\\at(., Pre)``; ``result`` supplies ``\\result``.
    """
    env = dict(env or {})
    for n in iter_nodes(e):
        if isinstance(n, Result) and result is None:
            raise EvalError("\\result has no value here", n.span)
    cp = compiled(tp)
    f = cp.logic(e, contract=True)
    outs = {k[1:]: (env, k) for k in env if k.startswith("*")}
    pre = None
    if snap is not None:
        pre = dict(snap.state)
        pre.update({k: v for k, v in snap.args.items() if k.startswith("*")})
        args = {k: v for k, v in snap.args.items() if not k.startswith("*")}
    else:
        args = {k: v for k, v in env.items() if not k.startswith("*")}
    return f(Env(env, Context(), args=args, locals_=env, outs=outs, pre=pre, result=result))


# -- ghost erasure -------------------------------------------------------------------------

def _reads_ghost(node) -> Optional[Name]:
    for n in iter_nodes(node):
        if isinstance(n, Name) and n.binding == "ghost":
            return n
    return None


def _erase_stmt(s):
    if isinstance(s, Assign) and s.ghost:
        return None
    if isinstance(s, Assert):
        return None
    if isinstance(s, Block):
        return replace(s, stmts=tuple(x for x in map(_erase_stmt, s.stmts) if x is not None))
    if isinstance(s, If):
        then = _erase_stmt(s.then) or Block((), s.then.span)
        orelse = None
        if s.orelse is not None:
            orelse = _erase_stmt(s.orelse) or Block((), s.orelse.span)
        _guard(s.cond)
        return replace(s, then=then, orelse=orelse)
    if isinstance(s, While):
        _guard(s.cond)
        return replace(s, body=_erase_stmt(s.body) or Block((), s.body.span), invariants=())
    if isinstance(s, For):
        if s.cond is not None:
            _guard(s.cond)
        return replace(
            s,
            init=_erase_stmt(s.init) if s.init is not None else None,
            step=_erase_stmt(s.step) if s.step is not None else None,
            body=_erase_stmt(s.body) or Block((), s.body.span),
            invariants=(),
        )
    _guard(s)
    return s


def _guard(node) -> None:
    leak = _reads_ghost(node)
    if leak is not None:
        raise GhostLeak(leak.ident, leak.span)


def strip_ghost(tp):
    """Remove ghost state, ghost code, assertions, logic definitions and contracts."""
    functions = []
    for fn in tp.functions:
        body = _erase_stmt(fn.body) if fn.body is not None else None
        functions.append(replace(fn, body=body, contract=None))
    return replace(tp, ghost_decls=(), predicates=(), logic_functions=(),
                   functions=tuple(functions))
