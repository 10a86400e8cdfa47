"""Closure compiler for resolved programs.

Each expression becomes ``f(env) -> value`` and each statement
``s(env) -> None | RETURN``.  Compilation happens once per TypedProgram;
the verifier then runs the same closures for every enumerated point.
"""

from __future__ import annotations

import math
import operator
from collections import OrderedDict
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

from minispec import thermo
from minispec.errors import (
    CalledHardwareFunction, DivisionByZero, EvalError, MissingSnapshot, OverflowInCheckedMode,
    StepBudgetExceeded, UnboundedQuantifier,
)
from minispec.frontend.ast import (
    INT32, REAL, UINT16, Assert, Assign, Binary, Block, BoolLit, Builtin, Call, Cast, Chain,
    Deref, ExprStmt, ExternEffect, For, FunctionDef, If, Index, IntLit, LocalDecl, Name,
    Old, Quant, RealLit, Result, Return, Type, Unary, While, AddrOf,
)
from minispec.frontend.printer import expr_text
from minispec.frontend.walk import iter_nodes
from minispec.semantics.values import AssertionFailure, default_value

RETURN = object()
DEFAULT_BUDGET = 1_000_000

Stub = Callable[[Tuple[Any, ...], Dict[str, Any]], Tuple[Any, Mapping[str, Any]]]


class Context:
    """Per-execution bookkeeping shared by nested calls."""
    __slots__ = ("steps", "budget", "failures", "trace", "stubs")

    def __init__(self, budget: int = DEFAULT_BUDGET, trace: bool = False,
                 stubs: Optional[Mapping[str, Stub]] = None):
        self.steps = 0
        self.budget = budget
        self.failures: List[AssertionFailure] = []
        self.trace: Optional[list] = [] if trace else None
        self.stubs = stubs or {}


class Env:
    """One activation.  ``state`` is shared with callers; arrays are tuples."""
    __slots__ = ("state", "pre", "args", "locals", "outs", "result", "qv", "ctx")

    def __init__(self, state, ctx=None, args=None, locals_=None, outs=None, pre=None,
                 result=None):
        self.state = state
        self.ctx = ctx
        self.args = args if args is not None else {}
        self.locals = locals_ if locals_ is not None else {}
        self.outs = outs if outs is not None else {}
        self.pre = pre
        self.result = result
        self.qv = {}


def _wrapper(ty: Optional[Type]):
    if ty == UINT16:
        return lambda v: v & 0xFFFF
    if ty == INT32:
        return lambda v: ((v + 0x80000000) & 0xFFFFFFFF) - 0x80000000
    return None


def _real_checked(v):
    if isinstance(v, float) and (v != v or v in (math.inf, -math.inf)):
        raise OverflowInCheckedMode("real arithmetic overflowed")
    return v


def _idiv(a, b):
    if b == 0:
        raise DivisionByZero("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def _imod(a, b):
    return a - b * _idiv(a, b)


def _rdiv(a, b):
    if b == 0:
        raise DivisionByZero("division by zero")
    try:
        return _real_checked(a / b)
    except OverflowError as exc:
        raise OverflowInCheckedMode(str(exc)) from None


def _safe_real(fn):
    def run(*a):
        try:
            return _real_checked(fn(*a))
        except OverflowError as exc:
            raise OverflowInCheckedMode(str(exc)) from None
    return run


_CMP = {"==": operator.eq, "!=": operator.ne, "<": operator.lt, "<=": operator.le,
        ">": operator.gt, ">=": operator.ge}


def _floor(x):
    try:
        return math.floor(x)
    except (OverflowError, ValueError) as exc:
        raise OverflowInCheckedMode(str(exc)) from None


def _thermo(fn):
    def run(x):
        try:
            return fn(x)
        except OverflowError as exc:
            raise OverflowInCheckedMode(str(exc)) from None
    return run


BUILTIN_IMPL = {
    "\\abs": abs,
    "\\floor": _floor,
    "\\exp": _safe_real(math.exp),
    "\\thermistor_R": _thermo(thermo.resistance),
    "\\thermistor_U": _thermo(thermo.divider_voltage),
    "\\thermistor_D": _thermo(thermo.adc_code),
}


class CompiledFunction:
    def __init__(self, prog: "CompiledProgram", fn: FunctionDef):
        self.prog = prog
        self.fn = fn
        self.value_params = tuple(p.name for p in fn.params if not p.out)
        self.out_params = tuple(p.name for p in fn.params if p.out)
        self.param_types = {p.name: p.type for p in fn.params}
        self.body = None
        self.needs_pre = False
        if fn.body is not None:
            self.needs_pre = any(isinstance(n, Old) for n in iter_nodes(fn.body))

    def compile(self) -> None:
        if self.body is None and self.fn.body is not None:
            self.body = self.prog.stmt(self.fn.body, self.fn)

    def snapshot(self, env: Env) -> Dict[str, Any]:
        pre = dict(env.state)
        for name, (cont, key) in env.outs.items():
            pre["*" + name] = cont[key]
        return pre

    def invoke(self, ctx: Context, state: Dict[str, Any], argvals: Tuple[Any, ...],
               refs: Dict[str, Tuple[dict, str]], top: bool = False) -> Env:
        fn = self.fn
        stub = ctx.stubs.get(fn.name)
        if stub is not None:
            ret, outs = stub(argvals, state)
            for name, value in outs.items():
                if name in refs:
                    cont, key = refs[name]
                    cont[key] = value
            return Env(state, ctx, result=ret)
        if fn.hardware or fn.body is None:
            raise CalledHardwareFunction(
                f"call of {'hardware ' if fn.hardware else 'undefined '}function '{fn.name}' "
                "without a stub")
        if self.body is None:
            self.compile()
        args = {}
        for name, v in zip(self.value_params, argvals):
            if self.param_types[name] == REAL:
                v = float(v)
            args[name] = v
        env = Env(state, ctx, args=args, locals_=dict(args), outs=refs)
        if top or self.needs_pre:
            env.pre = self.snapshot(env)
        self.body(env)
        return env


class CompiledProgram:
    def __init__(self, tp):
        self.tp = tp
        self.consts = dict(tp.const_values)
        self.functions = {fn.name: CompiledFunction(self, fn) for fn in tp.functions}
        self.logic_defs: Dict[str, Callable] = {}
        self._logic_src = {x.name: x for x in list(tp.predicates) + list(tp.logic_functions)}
        self._logic_cache: Dict[Tuple, Any] = {}

    # -- entry points -------------------------------------------------------------------

    def function(self, name: str) -> CompiledFunction:
        cf = self.functions[name]
        cf.compile()
        return cf

    def logic(self, e, contract: bool = False) -> Callable[[Env], Any]:
        """Compile a resolved logic expression.

        With ``contract=True`` parameters read their entry values, as in an ensures
        clause; otherwise they read the current locals.
        """
        return self.expr(e, contract=contract)

    # -- expressions ----------------------------------------------------------------------

    def expr(self, e, contract: bool = False, pre: bool = False) -> Callable[[Env], Any]:
        x = lambda sub: self.expr(sub, contract, pre)  # noqa: E731
        if isinstance(e, (IntLit, BoolLit)):
            v = e.value
            return lambda env: v
        if isinstance(e, RealLit):
            v = float(e.value)
            return lambda env: v
        if isinstance(e, Name):
            return self._name(e, contract, pre)
        if isinstance(e, Unary):
            f = x(e.operand)
            if e.op == "!":
                return lambda env: not f(env)
            if e.op == "+":
                return f
            w = _wrapper(e.ty)
            if w is not None:
                return lambda env: w(-f(env))
            return lambda env: -f(env)
        if isinstance(e, Binary):
            return self._binary(e, x)
        if isinstance(e, Chain):
            ops = [_CMP[o] for o in e.ops]
            fs = [x(o) for o in e.operands]
            first, rest = fs[0], list(zip(ops, fs[1:]))

            def chain(env):
                a = first(env)
                for op, f in rest:
                    b = f(env)
                    if not op(a, b):
                        return False
                    a = b
                return True
            return chain
        if isinstance(e, Deref):
            name = e.target.ident
            if pre:
                key = "*" + name

                def deref_pre(env):
                    if env.pre is None:
                        raise MissingSnapshot("no pre-state snapshot")
                    return env.pre[key]
                return deref_pre

            def deref(env):
                cont, key = env.outs[name]
                return cont[key]
            return deref
        if isinstance(e, Index):
            base, index = x(e.base), x(e.index)

            def idx(env):
                arr, i = base(env), index(env)
                if not 0 <= i < len(arr):
                    raise EvalError(f"index {i} out of bounds [0, {len(arr)})", e.span)
                return arr[i]
            return idx
        if isinstance(e, Call):
            if e.kind == "function":
                return self._call(e, contract)
            return self._logic_call(e, x)
        if isinstance(e, Builtin):
            impl = BUILTIN_IMPL[e.name]
            f = x(e.args[0])
            return lambda env: impl(f(env))
        if isinstance(e, Old):
            inner = self.expr(e.expr, contract, pre=True)

            def old(env):
                if env.pre is None:
                    raise MissingSnapshot("\\old used without a pre-state snapshot", e.span)
                return inner(env)
            return old
        if isinstance(e, Result):
            def result(env):
                if env.result is None:
                    raise EvalError("\\result has no value here", e.span)
                return env.result
            return result
        if isinstance(e, Quant):
            return self._quant(e, x)
        if isinstance(e, Cast):
            f = x(e.expr)
            t = e.target
            if t == REAL:
                return _safe_real(lambda env: float(f(env)))
            w = _wrapper(t)
            if w is None:
                return lambda env: int(f(env))
            return lambda env: w(int(f(env)))
        raise EvalError(f"cannot evaluate {type(e).__name__}", getattr(e, "span", None))

    def _name(self, e: Name, contract: bool, pre: bool):
        name, b = e.ident, e.binding
        if b == "const":
            v = self.consts[name]
            return lambda env: v
        if b in ("module", "ghost"):
            if pre:
                def read_pre(env):
                    if env.pre is None:
                        raise MissingSnapshot("no pre-state snapshot", e.span)
                    return env.pre[name]
                return read_pre
            return lambda env: env.state[name]
        if b == "param":
            if contract or pre:
                return lambda env: env.args[name]
            return lambda env: env.locals[name]
        if b in ("local", "lparam"):
            if pre and b == "local":
                raise EvalError(f"local '{name}' has no pre-state value", e.span)
            return lambda env: env.locals[name]
        if b == "quant":
            return lambda env: env.qv[name]
        raise EvalError(f"unresolved name '{name}'", e.span)

    def _binary(self, e: Binary, x):
        op = e.op
        lf, rf = x(e.left), x(e.right)
        if op == "&&":
            return lambda env: lf(env) and rf(env)
        if op == "||":
            return lambda env: lf(env) or rf(env)
        if op == "==>":
            return lambda env: (not lf(env)) or rf(env)
        if op == "<==>":
            return lambda env: bool(lf(env)) == bool(rf(env))
        if op in _CMP:
            cmp = _CMP[op]
            return lambda env: cmp(lf(env), rf(env))
        ty = e.ty
        if ty == REAL:
            if op == "/":
                return lambda env: _rdiv(lf(env), rf(env))
            fn = {"+": operator.add, "-": operator.sub, "*": operator.mul}[op]
            return _safe_real(lambda env: fn(lf(env), rf(env)))
        if op == "/":
            base = lambda env: _idiv(lf(env), rf(env))  # noqa: E731
        elif op == "%":
            base = lambda env: _imod(lf(env), rf(env))  # noqa: E731
        else:
            fn = {"+": operator.add, "-": operator.sub, "*": operator.mul}[op]
            if ty == UINT16:
                return lambda env: fn(lf(env), rf(env)) & 0xFFFF
            base = lambda env: fn(lf(env), rf(env))  # noqa: E731
        w = _wrapper(ty)
        if w is None:
            return base
        return lambda env: w(base(env))

    def _quant(self, e: Quant, x):
        var = e.var
        body = x(e.body)
        if e.lower is None or e.upper is None:
            def unbounded(env):
                raise UnboundedQuantifier(
                    f"\\{e.kind} over {e.var_type} '{var}' has no finite range", e.span)
            return unbounded
        lo, hi = x(e.lower), x(e.upper)
        want = e.kind == "forall"

        def quant(env):
            saved = env.qv.get(var)
            try:
                for i in range(lo(env), hi(env) + 1):
                    env.qv[var] = i
                    if bool(body(env)) != want:
                        return not want
                return want
            finally:
                if saved is None:
                    env.qv.pop(var, None)
                else:
                    env.qv[var] = saved
        return quant

    def _logic_call(self, e: Call, x):
        name = e.func
        argfs = [x(a) for a in e.args]
        cache = self._logic_cache

        def call(env):
            args = tuple(f(env) for f in argfs)
            key = (name, args)
            try:
                return cache[key]
            except KeyError:
                pass
            except TypeError:       # unhashable (array) argument
                return self._logic_def(name)(args)
            v = self._logic_def(name)(args)
            if len(cache) < 200_000:
                cache[key] = v
            return v
        return call

    def _logic_def(self, name: str):
        f = self.logic_defs.get(name)
        if f is None:
            d = self._logic_src[name]
            params = tuple((p.name, p.type) for p in d.params)
            body = self.expr(d.body)
            is_real = getattr(d, "ret", None) == REAL

            def f(args):
                locals_ = {}
                for (pname, pty), v in zip(params, args):
                    locals_[pname] = float(v) if pty == REAL else v
                v = body(Env(None, locals_=locals_))
                return float(v) if is_real else v
            self.logic_defs[name] = f
        return f

    def _call(self, e: Call, contract: bool):
        callee = self.functions[e.func]
        fn = callee.fn
        value_fs, ref_fs = [], []
        for prm, a in zip(fn.params, e.args):
            if prm.out:
                ref_fs.append((prm.name, self._ref(a)))
            else:
                value_fs.append(self.expr(a, contract))
        ret_ty = fn.ret
        conv = float if ret_ty == REAL else None

        def call(env):
            argvals = tuple(f(env) for f in value_fs)
            refs = {name: rf(env) for name, rf in ref_fs}
            res = callee.invoke(env.ctx, env.state, argvals, refs).result
            return conv(res) if conv is not None and res is not None else res
        return call

    def _ref(self, a):
        if isinstance(a, AddrOf):
            t = a.target
            name = t.ident
            if t.binding in ("module", "ghost"):
                return lambda env: (env.state, name)
            return lambda env: (env.locals, name)
        name = a.ident         # out parameter passed through
        return lambda env: env.outs[name]

    # -- statements -----------------------------------------------------------------------

    def stmt(self, s, fn: FunctionDef):
        f = self._stmt(s, fn)
        if isinstance(s, Block):
            return f
        span = s.span

        def counted(env):
            ctx = env.ctx
            ctx.steps += 1
            if ctx.steps > ctx.budget:
                raise StepBudgetExceeded(f"step budget of {ctx.budget} exceeded", span)
            if ctx.trace is not None:
                ctx.trace.append(span)
            return f(env)
        return counted

    def _check(self, e, fn: FunctionDef, kind: str):
        """Closure recording a failure when an in-body annotation does not hold."""
        test = self.expr(e)
        text = expr_text(e)
        names = []
        seen = set()
        for n in iter_nodes(e):
            if isinstance(n, Name) and n.binding in ("module", "ghost", "param", "local") \
                    and n.ident not in seen:
                seen.add(n.ident)
                names.append((n.ident, self.expr(n)))
            elif isinstance(n, Deref) and "*" + n.target.ident not in seen:
                seen.add("*" + n.target.ident)
                names.append(("*" + n.target.ident, self.expr(n)))
        span = e.span
        fname = fn.name

        def check(env, kind=kind):
            try:
                ok = test(env)
                detail = ""
            except EvalError as exc:
                ok, detail = False, f"{type(exc).__name__}: {exc.message}"
            if not ok:
                values = []
                for label, f in names:
                    try:
                        values.append((label, f(env)))
                    except EvalError:
                        pass
                env.ctx.failures.append(
                    AssertionFailure(kind, span, fname, text, tuple(values), detail))
        return check

    def _stmt(self, s, fn: FunctionDef):
        if isinstance(s, Block):
            stmts = [self.stmt(x, fn) for x in s.stmts]
            if len(stmts) == 1:
                return stmts[0]

            def block(env):
                for st in stmts:
                    if st(env) is RETURN:
                        return RETURN
            return block
        if isinstance(s, LocalDecl):
            name = s.name
            if s.init is None:
                v0 = default_value(s.type)

                def decl(env):
                    env.locals[name] = v0
                return decl
            init = self._coerced(s.init, s.type)

            def decl_init(env):
                env.locals[name] = init(env)
            return decl_init
        if isinstance(s, Assign):
            return self._assign(s)
        if isinstance(s, If):
            cond = self.expr(s.cond)
            then = self.stmt(s.then, fn)
            if s.orelse is None:
                def if_(env):
                    if cond(env):
                        return then(env)
                return if_
            orelse = self.stmt(s.orelse, fn)

            def if_else(env):
                if cond(env):
                    return then(env)
                return orelse(env)
            return if_else
        if isinstance(s, (While, For)):
            return self._loop(s, fn)
        if isinstance(s, Return):
            if s.value is None:
                return lambda env: RETURN
            value = self._coerced(s.value, fn.ret)

            def ret(env):
                env.result = value(env)
                return RETURN
            return ret
        if isinstance(s, ExprStmt):
            f = self.expr(s.expr)

            def call(env):
                f(env)
            return call
        if isinstance(s, Assert):
            check = self._check(s.expr, fn, "assert")

            def assert_(env):
                check(env)
            return assert_
        if isinstance(s, ExternEffect):
            return lambda env: None
        raise EvalError(f"cannot execute {type(s).__name__}", s.span)

    def _coerced(self, e, ty: Type):
        f = self.expr(e)
        if ty == REAL and e.ty != REAL:
            return lambda env: float(f(env))
        return f

    def _assign(self, s: Assign):
        t = s.target
        value = self._coerced(s.value, t.ty)
        if isinstance(t, Name):
            name = t.ident
            if t.binding in ("module", "ghost"):
                def set_state(env):
                    env.state[name] = value(env)
                return set_state

            def set_local(env):
                env.locals[name] = value(env)
            return set_local
        if isinstance(t, Deref):
            name = t.target.ident

            def set_out(env):
                cont, key = env.outs[name]
                cont[key] = value(env)
            return set_out
        assert isinstance(t, Index) and isinstance(t.base, Name)
        name = t.base.ident
        index = self.expr(t.index)
        in_state = t.base.binding in ("module", "ghost")

        def set_elem(env):
            store = env.state if in_state else env.locals
            arr = store[name]
            i = index(env)
            if not 0 <= i < len(arr):
                raise EvalError(f"index {i} out of bounds [0, {len(arr)})", t.span)
            store[name] = arr[:i] + (value(env),) + arr[i + 1:]
        return set_elem

    def _loop(self, s, fn: FunctionDef):
        cond = self.expr(s.cond) if s.cond is not None else (lambda env: True)
        body = self.stmt(s.body, fn)
        init = self.stmt(s.init, fn) if isinstance(s, For) and s.init is not None else None
        step = self.stmt(s.step, fn) if isinstance(s, For) and s.step is not None else None
        checks = [self._check(inv, fn, "invariant_init") for inv in s.invariants]
        span = s.span

        def loop(env):
            if init is not None:
                init(env)
            for c in checks:
                c(env, "invariant_init")
            ctx = env.ctx
            while cond(env):
                # each iteration costs a step, so empty bodies cannot spin forever
                ctx.steps += 1
                if ctx.steps > ctx.budget:
                    raise StepBudgetExceeded(f"step budget of {ctx.budget} exceeded", span)
                if body(env) is RETURN:
                    return RETURN
                if step is not None:
                    step(env)
                for c in checks:
                    c(env, "invariant_preserve")
        return loop


_CACHE: "OrderedDict[int, Tuple[object, CompiledProgram]]" = OrderedDict()


def compiled(tp) -> CompiledProgram:
    """Compiled form of ``tp``, cached by identity."""
    key = id(tp)
    hit = _CACHE.get(key)
    if hit is not None and hit[0] is tp:
        _CACHE.move_to_end(key)
        return hit[1]
    cp = CompiledProgram(tp)
    _CACHE[key] = (tp, cp)
    while len(_CACHE) > 64:
        _CACHE.popitem(last=False)
    return cp
