"""Name resolution and type checking.

Scope rules follow the header/implementation split of the case study:

* contracts see parameters, constants, ghost state and logic definitions,
  never module variables (those live in the implementation file);
* an assigns clause may name a module variable only in qualified form,
  ``module::var``;
* concrete code sees locals, parameters, module variables and constants;
  reading ghost state from concrete code is a :class:`GhostLeak`;
* ghost statements and in-body annotations see everything.

Types widen implicitly along uint16 -> int32 -> integer -> real only.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from minispec.errors import (
    DuplicateName, GhostLeak, ResolveError, TypeMismatch, UndefinedName,
)
from minispec.frontend.ast import (
    BOOL, DEFAULT_BEHAVIOR, INT32, INTEGER, REAL, UINT16, VOID, AddrOf, ArrayInit, Assert,
    Assign, Binary, Block, BoolLit, Builtin, Call, Cast, Chain, ConstDecl,
    Contract, Deref, Expr, ExprStmt, ExternEffect, For, FunctionDef, GhostDecl, If,
    Index, IntLit, LocalDecl, LogicFunction, ModuleVar, Name, Nothing, Old, Param,
    Predicate, Program, Quant, RealLit, Result, Return, Stmt, Type, Unary, While,
)

_RANK = {"uint16": 0, "int32": 1, "integer": 2, "real": 3}
_ARITH = {"+", "-", "*", "/", "%"}
_REL = {"==", "!=", "<", "<=", ">", ">="}
_BOOL_OPS = {"&&", "||", "==>", "<==>"}


@dataclass(frozen=True)
class TypedProgram(Program):
    """A resolved program.  Prototypes are merged into their definitions."""
    const_values: Mapping[str, object] = field(default_factory=dict)

    def function(self, name: str) -> FunctionDef:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)

    def has_function(self, name: str) -> bool:
        return any(fn.name == name for fn in self.functions)

    def predicate(self, name: str) -> Optional[Predicate]:
        return next((p for p in self.predicates if p.name == name), None)

    def logic_function(self, name: str) -> Optional[LogicFunction]:
        return next((f for f in self.logic_functions if f.name == name), None)

    def module_var(self, name: str) -> Optional[ModuleVar]:
        return next((v for v in self.module_vars if v.name == name), None)

    def ghost(self, name: str) -> Optional[GhostDecl]:
        return next((g for g in self.ghost_decls if g.name == name), None)


def assignable(target: Type, value: Type) -> bool:
    if target == value:
        return True
    if target.name in _RANK and value.name in _RANK:
        return _RANK[value.name] <= _RANK[target.name]
    return False


def _join(a: Type, b: Type, logic: bool) -> Type:
    if a.name == "real" or b.name == "real":
        return REAL
    if logic:
        return INTEGER
    return a if _RANK[a.name] >= _RANK[b.name] else b


def literal_type(value: int, logic: bool) -> Type:
    if logic:
        return INTEGER
    if 0 <= value <= 0xFFFF:
        return UINT16
    if -2**31 <= value < 2**31:
        return INT32
    return INTEGER


# contexts
CONST = "const"
LOGIC_DEF = "logic_def"
CONTRACT = "contract"
BODY = "body"
GHOST = "ghost"
ANNOT = "annot"
COUPLING = "coupling"
EXPECT = "expect"

_LOGIC_CONTEXTS = {LOGIC_DEF, CONTRACT, ANNOT, COUPLING, EXPECT}
_SEES_GHOSTS = {CONTRACT, GHOST, ANNOT, COUPLING, EXPECT}
_SEES_MODULE = {BODY, GHOST, ANNOT, COUPLING, EXPECT}


class _Scope:
    def __init__(self, kind: str, fn: Optional[FunctionDef] = None, allow_old: bool = False,
                 result_type: Optional[Type] = None, frames: Optional[List[Dict]] = None):
        self.kind = kind
        self.fn = fn
        self.allow_old = allow_old
        self.result_type = result_type
        self.frames: List[Dict[str, Tuple[str, Type]]] = frames if frames is not None else [{}]

    @property
    def logic(self) -> bool:
        return self.kind in _LOGIC_CONTEXTS

    def child(self, **kw) -> "_Scope":
        s = _Scope(self.kind, self.fn, self.allow_old, self.result_type, self.frames + [{}])
        for k, v in kw.items():
            setattr(s, k, v)
        return s

    def with_kind(self, kind: str, **kw) -> "_Scope":
        s = _Scope(kind, self.fn, self.allow_old, self.result_type, self.frames)
        for k, v in kw.items():
            setattr(s, k, v)
        return s

    def local(self, name: str) -> Optional[Tuple[str, Type]]:
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        return None


class Resolver:
    def __init__(self, program: Program):
        self.p = program
        self.consts: Dict[str, ConstDecl] = {}
        self.const_values: Dict[str, object] = {}
        self.module_vars: Dict[str, ModuleVar] = {}
        self.ghosts: Dict[str, GhostDecl] = {}
        self.predicates: Dict[str, Predicate] = {}
        self.logic_fns: Dict[str, LogicFunction] = {}
        self.functions: Dict[str, FunctionDef] = {}

    # -- entry ------------------------------------------------------------------------

    def run(self) -> TypedProgram:
        p = self.p
        seen: Dict[str, object] = {}
        for decl in list(p.constants) + list(p.module_vars) + list(p.ghost_decls):
            if decl.name in seen:
                raise DuplicateName(decl.name, decl.span)
            seen[decl.name] = decl

        consts = []
        for c in p.constants:
            rc = self._const(c)
            consts.append(rc)
            self.consts[c.name] = rc
        mvars = []
        for mv in p.module_vars:
            init = self._static_init(mv.type, mv.init, mv.span)
            rv = replace(mv, init=init)
            mvars.append(rv)
            self.module_vars[mv.name] = rv
        ghosts = []
        for g in p.ghost_decls:
            init = self._static_init(g.type, g.init, g.span)
            rg = replace(g, init=init)
            ghosts.append(rg)
            self.ghosts[g.name] = rg

        preds, lfns = self._logic_defs()
        functions = self._merge_functions()
        for fn in functions:
            self.functions[fn.name] = fn
        resolved = [self._function(fn) for fn in functions]

        return TypedProgram(
            constants=tuple(consts), module_vars=tuple(mvars), ghost_decls=tuple(ghosts),
            predicates=tuple(preds), logic_functions=tuple(lfns), functions=tuple(resolved),
            modules=p.modules, const_values=dict(self.const_values),
        )

    # -- constants and static initializers -------------------------------------------

    def _const(self, c: ConstDecl) -> ConstDecl:
        value = self._static_init(c.type, c.value, c.span)
        self.const_values[c.name] = _fold(value, self.const_values)
        return replace(c, value=value)

    def _static_init(self, ty: Type, init: Optional[Expr], span) -> Optional[Expr]:
        if init is None:
            return None
        scope = _Scope(CONST)
        if ty.name == "array":
            if not isinstance(init, ArrayInit):
                raise TypeMismatch(str(ty), "scalar initializer", init.span)
            if len(init.elements) > ty.size:
                raise TypeMismatch(f"at most {ty.size} elements", f"{len(init.elements)}",
                                   init.span)
            elems = []
            for e in init.elements:
                re_ = self.expr(e, scope)
                self._require_assignable(ty.elem, re_, "array element")
                _fold(re_, self.const_values)
                elems.append(re_)
            return replace(init, elements=tuple(elems), ty=ty)
        if isinstance(init, ArrayInit):
            raise TypeMismatch(str(ty), "array initializer", init.span)
        re_ = self.expr(init, scope)
        self._require_assignable(ty, re_, "initializer")
        _fold(re_, self.const_values)
        return re_

    def _require_assignable(self, target: Type, value: Expr, context: str) -> None:
        if not assignable(target, value.ty):
            raise TypeMismatch(str(target), str(value.ty), value.span, context)

    # -- logic definitions ---------------------------------------------------------------

    def _logic_defs(self) -> Tuple[List[Predicate], List[LogicFunction]]:
        # A definition may use any definition that appears earlier in source order.
        preds: Dict[str, Predicate] = {}
        lfns: Dict[str, LogicFunction] = {}
        seen = set()
        for _, d in self._declaration_order():
            if d.name in seen:
                raise DuplicateName(d.name, d.span)
            seen.add(d.name)
        for kind, d in self._declaration_order():
            scope = _Scope(LOGIC_DEF)
            for prm in d.params:
                if prm.name in scope.frames[0]:
                    raise DuplicateName(prm.name, prm.span)
                scope.frames[0][prm.name] = ("lparam", prm.type)
            body = self.expr(d.body, scope)
            if kind == "p":
                if body.ty != BOOL:
                    raise TypeMismatch("bool", str(body.ty), body.span, f"predicate {d.name}")
                rd = replace(d, body=body)
                preds[d.name] = rd
                self.predicates[d.name] = rd
            else:
                self._require_assignable(d.ret, body, f"logic function {d.name}")
                rd = replace(d, body=body)
                lfns[d.name] = rd
                self.logic_fns[d.name] = rd
        return ([preds[d.name] for d in self.p.predicates],
                [lfns[d.name] for d in self.p.logic_functions])

    def _declaration_order(self):
        items = [("p", d) for d in self.p.predicates] + [("f", d) for d in self.p.logic_functions]
        file_rank = {}
        for d in list(self.p.predicates) + list(self.p.logic_functions):
            file_rank.setdefault(d.span.file, len(file_rank))
        return sorted(items, key=lambda kd: (file_rank[kd[1].span.file], kd[1].span.line_start,
                                             kd[1].span.col_start))

    # -- functions ----------------------------------------------------------------------

    def _merge_functions(self) -> List[FunctionDef]:
        groups: Dict[str, List[FunctionDef]] = {}
        for fn in self.p.functions:
            groups.setdefault(fn.name, []).append(fn)
        merged = []
        for name, decls in groups.items():
            if name in self.consts or name in self.module_vars or name in self.ghosts:
                raise DuplicateName(name, decls[0].span)
            bodies = [d for d in decls if d.body is not None]
            if len(bodies) > 1:
                raise DuplicateName(name, bodies[1].span)
            contracts = [d for d in decls if d.contract is not None and not d.contract.is_empty]
            if len(contracts) > 1:
                raise DuplicateName(name, contracts[1].span)
            first = decls[0]
            for d in decls[1:]:
                if _signature(d) != _signature(first):
                    raise TypeMismatch(_signature_text(first), _signature_text(d), d.span,
                                       f"conflicting declarations of '{name}'")
            base = bodies[0] if bodies else first
            merged.append(replace(
                base,
                contract=contracts[0].contract if contracts else None,
                hardware=any(d.hardware for d in decls),
                module=base.module,
            ))
        return merged

    def _function(self, fn: FunctionDef) -> FunctionDef:
        names = set()
        for prm in fn.params:
            if prm.name in names:
                raise DuplicateName(prm.name, prm.span)
            names.add(prm.name)
            if prm.type in (VOID,) or prm.type.name == "array":
                raise TypeMismatch("scalar parameter type", str(prm.type), prm.span)
        contract = self._contract(fn) if fn.contract is not None else None
        body = None
        if fn.body is not None:
            scope = _Scope(BODY, fn)
            body = self._block(fn.body, scope, fn)
        return replace(fn, contract=contract, body=body)

    def _contract(self, fn: FunctionDef) -> Contract:
        c = fn.contract
        pre = _Scope(CONTRACT, fn)
        post = _Scope(CONTRACT, fn, allow_old=True,
                      result_type=None if fn.ret == VOID else fn.ret)
        requires = tuple(self._bool(e, pre, "requires") for e in c.requires)
        assigns = None
        if c.assigns is not None:
            assigns = tuple(self._assigns_target(fn, t) for t in c.assigns)
            if any(isinstance(t, Nothing) for t in assigns) and len(assigns) > 1:
                raise ResolveError("\\nothing cannot be combined with other locations",
                                   c.assigns[0].span)
        behaviors = []
        seen = set()
        for b in c.behaviors:
            if b.name in seen:
                raise DuplicateName(b.name, b.span)
            seen.add(b.name)
            behaviors.append(replace(
                b,
                assumes=tuple(self._bool(e, pre, "assumes") for e in b.assumes),
                ensures=tuple(self._bool(e, post, "ensures") for e in b.ensures),
            ))
        named = [b for b in behaviors if b.name != DEFAULT_BEHAVIOR]
        if (c.complete_declared or c.disjoint_declared) and not named:
            raise ResolveError("complete/disjoint declared without named behaviors", c.span)
        return replace(c, requires=requires, assigns=assigns, behaviors=tuple(behaviors))

    def _assigns_target(self, fn: FunctionDef, t: Expr) -> Expr:
        if isinstance(t, Nothing):
            return t
        if isinstance(t, Deref):
            prm = fn.param(t.target.ident)
            if t.target.module is None and prm is not None and prm.out:
                return replace(t, target=replace(t.target, binding="out", ty=prm.type),
                               ty=prm.type)
            raise UndefinedName(t.target.ident, t.target.span, "not an out parameter")
        assert isinstance(t, Name)
        if t.module is not None:
            mv = self.module_vars.get(t.ident)
            if mv is None or mv.module != t.module:
                raise UndefinedName(f"{t.module}::{t.ident}", t.span,
                                    f"no module variable '{t.ident}' in module '{t.module}'")
            return replace(t, binding="module", ty=mv.type)
        if t.ident in self.ghosts:
            return replace(t, binding="ghost", ty=self.ghosts[t.ident].type)
        prm = fn.param(t.ident)
        if prm is not None and not prm.out:
            return replace(t, binding="param", ty=prm.type)
        if t.ident in self.consts:
            raise ResolveError(f"constant '{t.ident}' is not an assignable location", t.span)
        if t.ident in self.module_vars:
            mod = self.module_vars[t.ident].module
            raise UndefinedName(t.ident, t.span,
                                f"module variable is not visible in a contract; "
                                f"qualify it as {mod}::{t.ident}")
        raise UndefinedName(t.ident, t.span)

    # -- statements ---------------------------------------------------------------------

    def _block(self, b: Block, scope: _Scope, fn: FunctionDef) -> Block:
        inner = scope.child()
        return replace(b, stmts=tuple(self._stmt(s, inner, fn) for s in b.stmts))

    def _declare_local(self, name: str, ty: Type, scope: _Scope, fn: FunctionDef, span) -> None:
        if (scope.local(name) is not None or fn.param(name) is not None
                or name in self.consts or name in self.module_vars or name in self.ghosts):
            raise DuplicateName(name, span)
        if ty == VOID or ty.name == "array":
            raise TypeMismatch("scalar type", str(ty), span, f"local '{name}'")
        scope.frames[-1][name] = ("local", ty)

    def _stmt(self, s: Stmt, scope: _Scope, fn: FunctionDef) -> Stmt:
        if isinstance(s, Block):
            return self._block(s, scope, fn)
        if isinstance(s, LocalDecl):
            init = None
            if s.init is not None:
                init = self.expr(s.init, scope)
                self._require_assignable(s.type, init, f"initializer of '{s.name}'")
            self._declare_local(s.name, s.type, scope, fn, s.span)
            return replace(s, init=init)
        if isinstance(s, Assign):
            return self._assign(s, scope, fn)
        if isinstance(s, If):
            cond = self._bool(s.cond, scope, "condition")
            then = self._stmt(s.then, scope.child(), fn)
            orelse = self._stmt(s.orelse, scope.child(), fn) if s.orelse is not None else None
            return replace(s, cond=cond, then=then, orelse=orelse)
        if isinstance(s, While):
            inv = self._invariants(s.invariants, scope)
            cond = self._bool(s.cond, scope, "loop condition")
            return replace(s, cond=cond, body=self._stmt(s.body, scope.child(), fn), invariants=inv)
        if isinstance(s, For):
            inner = scope.child()
            init = self._stmt(s.init, inner, fn) if s.init is not None else None
            inv = self._invariants(s.invariants, inner)
            cond = self._bool(s.cond, inner, "loop condition") if s.cond is not None else None
            step = self._stmt(s.step, inner, fn) if s.step is not None else None
            body = self._stmt(s.body, inner.child(), fn)
            return replace(s, init=init, cond=cond, step=step, body=body, invariants=inv)
        if isinstance(s, Return):
            if s.value is None:
                if fn.ret != VOID:
                    raise TypeMismatch(str(fn.ret), "void", s.span, "return")
                return s
            if fn.ret == VOID:
                raise TypeMismatch("void", "a value", s.span, "return")
            value = self.expr(s.value, scope)
            self._require_assignable(fn.ret, value, "return value")
            return replace(s, value=value)
        if isinstance(s, ExprStmt):
            if not isinstance(s.expr, Call):
                raise ResolveError("expression statement must be a call", s.span)
            return replace(s, expr=self.expr(s.expr, scope, void_ok=True))
        if isinstance(s, Assert):
            return replace(s, expr=self._bool(s.expr, scope.with_kind(ANNOT, allow_old=True,
                                                                      result_type=None), "assert"))
        if isinstance(s, ExternEffect):
            if not fn.hardware:
                raise ResolveError("extern_effect is only allowed in hardware functions", s.span)
            return s
        raise ResolveError(f"unsupported statement {type(s).__name__}", s.span)

    def _invariants(self, invs: Sequence[Expr], scope: _Scope) -> Tuple[Expr, ...]:
        annot = scope.with_kind(ANNOT, allow_old=True, result_type=None)
        return tuple(self._bool(e, annot, "loop invariant") for e in invs)

    def _assign(self, s: Assign, scope: _Scope, fn: FunctionDef) -> Assign:
        rscope = scope.with_kind(GHOST) if s.ghost else scope
        target = self._lvalue(s.target, rscope, s.ghost)
        value = self.expr(s.value, rscope)
        self._require_assignable(target.ty, value, "assignment")
        return replace(s, target=target, value=value)

    def _lvalue(self, t: Expr, scope: _Scope, ghost: bool) -> Expr:
        base = t
        if isinstance(t, Index):
            base = t.base
            if not isinstance(base, Name):
                raise ResolveError("only named arrays can be indexed on assignment", t.span)
        if isinstance(base, Deref):
            rt = self.expr(t, scope)
            if ghost:
                raise ResolveError("ghost code cannot write concrete state", t.span)
            return rt
        name = base.ident if isinstance(base, Name) else None
        if name is None:
            raise ResolveError("invalid assignment target", t.span)
        if name in self.consts and scope.local(name) is None:
            raise ResolveError(f"cannot assign to constant '{name}'", t.span)
        is_ghost = name in self.ghosts and scope.local(name) is None
        if ghost and not is_ghost:
            raise ResolveError("ghost code cannot write concrete state", t.span)
        if not ghost and is_ghost:
            raise ResolveError(f"concrete code cannot assign ghost '{name}'", t.span)
        rt = self.expr(t, scope)
        if isinstance(base, Name) and isinstance(rt, Name) and rt.binding == "out":
            raise TypeMismatch(f"*{name}", "pointer", t.span, "assign through the out parameter")
        if rt.ty.name == "array":
            raise TypeMismatch("scalar", str(rt.ty), t.span, "assignment target")
        return rt

    # -- expressions --------------------------------------------------------------------

    def _bool(self, e: Expr, scope: _Scope, context: str) -> Expr:
        r = self.expr(e, scope)
        if r.ty != BOOL:
            raise TypeMismatch("bool", str(r.ty), r.span, context)
        return r

    def expr(self, e: Expr, scope: _Scope, void_ok: bool = False) -> Expr:
        logic = scope.logic
        if isinstance(e, IntLit):
            return replace(e, ty=literal_type(e.value, logic))
        if isinstance(e, RealLit):
            return replace(e, ty=REAL)
        if isinstance(e, BoolLit):
            return replace(e, ty=BOOL)
        if isinstance(e, Name):
            return self._name(e, scope)
        if isinstance(e, Unary):
            operand = self.expr(e.operand, scope)
            if e.op == "!":
                if operand.ty != BOOL:
                    raise TypeMismatch("bool", str(operand.ty), operand.span, "operand of '!'")
                return replace(e, operand=operand, ty=BOOL)
            if not operand.ty.is_numeric:
                raise TypeMismatch("number", str(operand.ty), operand.span, "operand of '-'")
            if operand.ty.name == "real":
                ty = REAL
            elif logic:
                ty = INTEGER
            else:
                ty = INT32 if operand.ty == UINT16 else operand.ty
            return replace(e, operand=operand, ty=ty)
        if isinstance(e, Binary):
            return self._binary(e, scope)
        if isinstance(e, Chain):
            operands = tuple(self.expr(x, scope) for x in e.operands)
            for op, a, b in zip(e.ops, operands, operands[1:]):
                self._check_relation(op, a, b)
            return replace(e, operands=operands, ty=BOOL)
        if isinstance(e, Deref):
            name = e.target
            prm = scope.fn.param(name.ident) if scope.fn is not None else None
            if (prm is None or not prm.out or name.module is not None
                    or scope.local(name.ident) is not None or scope.kind in (COUPLING, LOGIC_DEF)):
                raise UndefinedName(name.ident, name.span, "'*' applies to out parameters only")
            return replace(e, target=replace(name, binding="out", ty=prm.type), ty=prm.type)
        if isinstance(e, AddrOf):
            raise TypeMismatch("value", "address", e.span,
                               "'&' is only allowed for out-parameter arguments")
        if isinstance(e, Index):
            base = self.expr(e.base, scope)
            if base.ty.name != "array":
                raise TypeMismatch("array", str(base.ty), base.span, "indexing")
            index = self.expr(e.index, scope)
            if not index.ty.is_integral:
                raise TypeMismatch("integer", str(index.ty), index.span, "array index")
            return replace(e, base=base, index=index, ty=base.ty.elem)
        if isinstance(e, Call):
            return self._call(e, scope, void_ok)
        if isinstance(e, Builtin):
            args = tuple(self.expr(a, scope) for a in e.args)
            arg = args[0]
            if not arg.ty.is_numeric:
                raise TypeMismatch("number", str(arg.ty), arg.span, e.name)
            if e.name == "\\abs":
                ty = REAL if arg.ty.name == "real" else INTEGER
            elif e.name in ("\\floor", "\\thermistor_D"):
                ty = INTEGER
            else:
                ty = REAL
            return replace(e, args=args, ty=ty)
        if isinstance(e, Old):
            if not scope.allow_old:
                raise ResolveError("\\old / \\at(., Pre) is not allowed here", e.span)
            inner = self.expr(e.expr, scope.with_kind(scope.kind, allow_old=False,
                                                      result_type=None))
            return replace(e, expr=inner, ty=inner.ty)
        if isinstance(e, Result):
            if scope.result_type is None:
                raise ResolveError("\\result is not allowed here", e.span)
            return replace(e, ty=scope.result_type)
        if isinstance(e, Quant):
            if not e.var_type.is_numeric:
                raise TypeMismatch("integer or real", str(e.var_type), e.span, "quantifier")
            if scope.local(e.var) is not None:
                raise DuplicateName(e.var, e.span)
            inner = scope.child()
            inner.frames[-1][e.var] = ("quant", e.var_type)
            body = self._bool(e.body, inner, "quantifier body")
            lower = upper = None
            if e.var_type.is_integral:
                lower, upper = _quant_bounds(e.kind, e.var, body)
            return replace(e, body=body, ty=BOOL, lower=lower, upper=upper)
        if isinstance(e, Cast):
            inner = self.expr(e.expr, scope)
            t = e.target
            if not (t.is_numeric and inner.ty.is_numeric):
                raise TypeMismatch(str(t), str(inner.ty), e.span, "cast")
            if logic and t.is_integral and inner.ty.name == "real":
                raise TypeMismatch("integral value", "real", e.span, "cast (use \\floor)")
            return replace(e, expr=inner, ty=t)
        if isinstance(e, ArrayInit):
            raise ResolveError("array initializers are only allowed in declarations", e.span)
        if isinstance(e, Nothing):
            raise ResolveError("\\nothing is only allowed in assigns clauses", e.span)
        raise ResolveError(f"unsupported expression {type(e).__name__}", e.span)

    def _check_relation(self, op: str, a: Expr, b: Expr) -> None:
        if a.ty.is_numeric and b.ty.is_numeric:
            return
        if op in ("==", "!=") and a.ty == BOOL and b.ty == BOOL:
            return
        bad = a if not a.ty.is_numeric else b
        raise TypeMismatch("number", str(bad.ty), bad.span, f"operand of '{op}'")

    def _binary(self, e: Binary, scope: _Scope) -> Expr:
        logic = scope.logic
        if e.op in ("==>", "<==>") and not logic:
            raise ResolveError(f"'{e.op}' is only allowed in annotations", e.span)
        left = self.expr(e.left, scope)
        right = self.expr(e.right, scope)
        if e.op in _BOOL_OPS:
            for side in (left, right):
                if side.ty != BOOL:
                    raise TypeMismatch("bool", str(side.ty), side.span, f"operand of '{e.op}'")
            return replace(e, left=left, right=right, ty=BOOL, logic=logic)
        if e.op in _REL:
            self._check_relation(e.op, left, right)
            return replace(e, left=left, right=right, ty=BOOL, logic=logic)
        for side in (left, right):
            if not side.ty.is_numeric:
                raise TypeMismatch("number", str(side.ty), side.span, f"operand of '{e.op}'")
        ty = _join(left.ty, right.ty, logic)
        if e.op == "%" and ty == REAL:
            raise TypeMismatch("integer", "real", e.span, "operand of '%'")
        return replace(e, left=left, right=right, ty=ty, logic=logic)

    def _name(self, e: Name, scope: _Scope) -> Name:
        kind = scope.kind
        if e.module is not None:
            mv = self.module_vars.get(e.ident)
            if mv is None or mv.module != e.module:
                raise UndefinedName(f"{e.module}::{e.ident}", e.span)
            if kind not in _SEES_MODULE:
                raise UndefinedName(f"{e.module}::{e.ident}", e.span,
                                    "module variables are not visible here")
            return replace(e, binding="module", ty=mv.type)
        local = scope.local(e.ident)
        if local is not None:
            return replace(e, binding=local[0], ty=local[1])
        if scope.fn is not None and kind not in (COUPLING, LOGIC_DEF, CONST):
            prm = scope.fn.param(e.ident)
            if prm is not None:
                if prm.out:
                    raise TypeMismatch(f"*{e.ident}", "pointer", e.span,
                                       "out parameters are accessed as '*name'")
                return replace(e, binding="param", ty=prm.type)
        if e.ident in self.consts:
            return replace(e, binding="const", ty=self.consts[e.ident].type)
        if e.ident in self.ghosts:
            if kind in _SEES_GHOSTS:
                return replace(e, binding="ghost", ty=self.ghosts[e.ident].type)
            if kind == BODY:
                raise GhostLeak(e.ident, e.span)
            raise UndefinedName(e.ident, e.span, "ghost state is not visible here")
        if e.ident in self.module_vars:
            mv = self.module_vars[e.ident]
            if kind == CONTRACT:
                raise UndefinedName(e.ident, e.span,
                                    "module variable is not visible in a contract")
            if kind not in _SEES_MODULE:
                raise UndefinedName(e.ident, e.span, "module variables are not visible here")
            if (kind in (BODY, GHOST, ANNOT) and mv.static and scope.fn is not None
                    and mv.module != scope.fn.module):
                raise UndefinedName(e.ident, e.span, f"static in module '{mv.module}'")
            return replace(e, binding="module", ty=mv.type)
        raise UndefinedName(e.ident, e.span)

    def _call(self, e: Call, scope: _Scope, void_ok: bool) -> Call:
        if scope.logic:
            target = self.predicates.get(e.func) or self.logic_fns.get(e.func)
            if target is None:
                hint = "C functions cannot be called in annotations" if e.func in self.functions else ""
                raise UndefinedName(e.func, e.span, hint)
            if len(e.args) != len(target.params):
                raise TypeMismatch(f"{len(target.params)} argument(s)", str(len(e.args)), e.span,
                                   f"call of '{e.func}'")
            args = []
            for prm, a in zip(target.params, e.args):
                ra = self.expr(a, scope)
                self._require_assignable(prm.type, ra, f"argument '{prm.name}' of '{e.func}'")
                args.append(ra)
            if isinstance(target, Predicate):
                return replace(e, args=tuple(args), ty=BOOL, kind="predicate")
            return replace(e, args=tuple(args), ty=target.ret, kind="logic")

        fn = self.functions.get(e.func)
        if fn is None:
            raise UndefinedName(e.func, e.span)
        if len(e.args) != len(fn.params):
            raise TypeMismatch(f"{len(fn.params)} argument(s)", str(len(e.args)), e.span,
                               f"call of '{e.func}'")
        args = []
        for prm, a in zip(fn.params, e.args):
            if prm.out:
                args.append(self._out_arg(prm, a, scope, e.func))
            else:
                ra = self.expr(a, scope)
                self._require_assignable(prm.type, ra, f"argument '{prm.name}' of '{e.func}'")
                args.append(ra)
        if fn.ret == VOID and not void_ok:
            raise TypeMismatch("a value", "void", e.span, f"call of '{e.func}'")
        return replace(e, args=tuple(args), ty=fn.ret, kind="function")

    def _out_arg(self, prm: Param, a: Expr, scope: _Scope, func: str) -> Expr:
        if isinstance(a, AddrOf):
            target = self._name(a.target, scope)
            if target.binding not in ("local", "module", "param", "ghost"):
                raise TypeMismatch("address of a variable", str(target.binding), a.span)
            if target.ty != prm.type:
                raise TypeMismatch(str(prm.type), str(target.ty), a.span,
                                   f"out argument '{prm.name}' of '{func}'")
            return replace(a, target=target, ty=prm.type)
        if isinstance(a, Name) and scope.fn is not None:
            own = scope.fn.param(a.ident)
            if own is not None and own.out and scope.local(a.ident) is None:
                if own.type != prm.type:
                    raise TypeMismatch(str(prm.type), str(own.type), a.span)
                return replace(a, binding="out", ty=own.type)
        raise TypeMismatch(f"&variable for out parameter '{prm.name}'", "expression", a.span,
                           f"call of '{func}'")


def _signature(fn: FunctionDef):
    return (tuple((p.type, p.name, p.out) for p in fn.params), fn.ret)


def _signature_text(fn: FunctionDef) -> str:
    params = ", ".join(f"{p.type}{'*' if p.out else ''} {p.name}" for p in fn.params)
    return f"{fn.ret} {fn.name}({params})"


def _fold(e: Expr, consts: Mapping[str, object]):
    """Evaluate a constant expression; raise ResolveError if it is not constant."""
    if isinstance(e, (IntLit, RealLit, BoolLit)):
        return e.value
    if isinstance(e, ArrayInit):
        return tuple(_fold(x, consts) for x in e.elements)
    if isinstance(e, Name) and e.binding == "const":
        return consts[e.ident]
    if isinstance(e, Unary):
        v = _fold(e.operand, consts)
        return (not v) if e.op == "!" else _wrap(-v, e.ty)
    if isinstance(e, Binary) and e.op in _ARITH:
        a, b = _fold(e.left, consts), _fold(e.right, consts)
        if e.op in ("/", "%") and b == 0:
            raise ResolveError("division by zero in constant expression", e.span)
        if e.ty == REAL:
            v = {"+": a + b, "-": a - b, "*": a * b, "/": a / b}[e.op]
        elif e.op == "/":
            v = _trunc_div(a, b)
        elif e.op == "%":
            v = a - b * _trunc_div(a, b)
        else:
            v = {"+": a + b, "-": a - b, "*": a * b}[e.op]
        return _wrap(v, e.ty)
    if isinstance(e, Cast):
        v = _fold(e.expr, consts)
        if e.target == REAL:
            return float(v)
        return _wrap(int(v), e.target)
    raise ResolveError("initializer is not a constant expression", e.span)


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def _wrap(v, ty: Type):
    if ty == UINT16:
        return v & 0xFFFF
    if ty == INT32:
        return ((v + 2**31) % 2**32) - 2**31
    return v


def _mentions(e: Expr, var: str) -> bool:
    from minispec.frontend.walk import iter_exprs
    return any(isinstance(x, Name) and x.ident == var and x.binding == "quant"
               for x in iter_exprs(e))


def _quant_bounds(kind: str, var: str, body: Expr) -> Tuple[Optional[Expr], Optional[Expr]]:
    """Find inclusive integer bounds for ``var`` from the guard of a quantifier.

    ``\\forall integer i; lo <= i < hi ==> P`` and
    ``\\exists integer i; lo <= i < hi && P`` are recognized; the guard may be a
    chain or a conjunction of comparisons.  Returns (None, None) if unbounded.
    """
    if kind == "forall":
        if not (isinstance(body, Binary) and body.op == "==>"):
            return None, None
        guard = body.left
    else:
        guard = body
    conjuncts: List[Expr] = []

    def flatten(x: Expr) -> None:
        if isinstance(x, Binary) and x.op == "&&":
            flatten(x.left)
            flatten(x.right)
        else:
            conjuncts.append(x)

    flatten(guard)
    pairs = []
    for c in conjuncts:
        if isinstance(c, Binary) and c.op in ("<", "<=", ">", ">="):
            pairs.append((c.left, c.op, c.right))
        elif isinstance(c, Chain):
            pairs.extend((a, op, b) for op, a, b in zip(c.ops, c.operands, c.operands[1:]))
    lower = upper = None

    def is_var(x: Expr) -> bool:
        return isinstance(x, Name) and x.ident == var and x.binding == "quant"

    def plus(x: Expr, k: int) -> Expr:
        return Binary("+", x, IntLit(k, x.span, INTEGER), x.span, INTEGER, True)

    for a, op, b in pairs:
        if is_var(b) and not _mentions(a, var) and a.ty.is_integral:
            a, b, op = b, a, {"<": ">", "<=": ">=", ">": "<", ">=": "<="}[op]
        if not is_var(a) or _mentions(b, var) or not b.ty.is_integral:
            continue
        # now: var OP bound
        if op == ">=" and lower is None:
            lower = b
        elif op == ">" and lower is None:
            lower = plus(b, 1)
        elif op == "<=" and upper is None:
            upper = b
        elif op == "<" and upper is None:
            upper = plus(b, -1)
    if lower is None or upper is None:
        return None, None
    return lower, upper


def link(programs: Sequence[Program]) -> Program:
    """Concatenate parsed files into one multi-module program."""
    modules: List[str] = []
    for p in programs:
        for m in p.modules:
            if m in modules:
                raise DuplicateName(m)
            modules.append(m)
    return Program(
        constants=tuple(c for p in programs for c in p.constants),
        module_vars=tuple(v for p in programs for v in p.module_vars),
        ghost_decls=tuple(g for p in programs for g in p.ghost_decls),
        predicates=tuple(x for p in programs for x in p.predicates),
        logic_functions=tuple(x for p in programs for x in p.logic_functions),
        functions=tuple(f for p in programs for f in p.functions),
        modules=tuple(modules),
    )


def resolve(p: Program) -> TypedProgram:
    return Resolver(p).run()


def resolve_logic(tp: TypedProgram, e: Expr, context: str = COUPLING,
                  fn: Optional[FunctionDef] = None, allow_old: bool = False,
                  result_type: Optional[Type] = None) -> Expr:
    """Resolve a standalone logic expression against a resolved program.

    ``context`` is ``coupling`` (pre-state relations for the checker) or
    ``expect`` (scenario expectations, which may use \\old and \\result).
    """
    r = Resolver(tp)
    r.consts = {c.name: c for c in tp.constants}
    r.const_values = dict(tp.const_values)
    r.module_vars = {v.name: v for v in tp.module_vars}
    r.ghosts = {g.name: g for g in tp.ghost_decls}
    r.predicates = {x.name: x for x in tp.predicates}
    r.logic_fns = {x.name: x for x in tp.logic_functions}
    r.functions = {f.name: f for f in tp.functions}
    scope = _Scope(context, fn, allow_old=allow_old, result_type=result_type)
    if fn is not None and context == EXPECT:
        for prm in fn.params:
            if not prm.out:
                scope.frames[0][prm.name] = ("param", prm.type)
    return r._bool(e, scope, context)
