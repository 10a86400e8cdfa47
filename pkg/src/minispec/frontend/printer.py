"""Pretty printer.  ``parse_source(pretty(p))`` is structurally equal to ``p``."""

from __future__ import annotations

from typing import List

from minispec.frontend.ast import (
    DEFAULT_BEHAVIOR, TYPE_SPELLING, AddrOf, ArrayInit, Assert, Assign, Block, BoolLit,
    Builtin, Binary, Call, Cast, Chain, Contract, Deref, Expr, ExprStmt, ExternEffect,
    For, FunctionDef, If, Index, IntLit, LocalDecl, Name, Nothing, Old, Param, Program,
    Quant, RealLit, Result, Return, Stmt, Type, Unary, While,
)

_LOGIC_PREC = {"==>": 1, "<==>": 1, "||": 2, "&&": 3,
               "==": 5, "!=": 5, "<": 5, "<=": 5, ">": 5, ">=": 5,
               "+": 6, "-": 6, "*": 7, "/": 7, "%": 7}
_C_PREC = dict(_LOGIC_PREC, **{"==": 4, "!=": 4})
_RELATIONS = {"==", "!=", "<", "<=", ">", ">="}
_UNARY = 8
_ATOM = 10


def type_text(ty: Type) -> str:
    if ty.name == "array":
        return type_text(ty.elem)
    return TYPE_SPELLING[ty.name]


def _decl(ty: Type, name: str) -> str:
    if ty.name == "array":
        return f"{type_text(ty.elem)} {name}[{ty.size}]"
    return f"{type_text(ty)} {name}"


def _real_text(lit: RealLit) -> str:
    if lit.text:
        return lit.text
    text = repr(lit.value)
    return text if any(c in text for c in ".eEn") else text + ".0"


class _ExprPrinter:
    def __init__(self, logic: bool):
        self.logic = logic
        self.prec_table = _LOGIC_PREC if logic else _C_PREC

    def prec(self, e: Expr) -> int:
        if isinstance(e, Binary):
            return self.prec_table[e.op]
        if isinstance(e, Chain):
            return 5
        if isinstance(e, (Unary, Cast, Deref, AddrOf)):
            return _UNARY
        if isinstance(e, Quant):
            return 0
        return _ATOM

    def wrap(self, e: Expr, need: int) -> str:
        text = self.expr(e)
        return f"({text})" if self.prec(e) < need else text

    def expr(self, e: Expr) -> str:
        if isinstance(e, IntLit):
            return str(e.value)
        if isinstance(e, RealLit):
            return _real_text(e)
        if isinstance(e, BoolLit):
            return "true" if e.value else "false"
        if isinstance(e, Name):
            return f"{e.module}::{e.ident}" if e.module else e.ident
        if isinstance(e, Unary):
            inner = self.wrap(e.operand, _UNARY)
            if isinstance(e.operand, Unary) or inner.startswith(("-", "!")):
                inner = f"({self.expr(e.operand)})"
            return f"{e.op}{inner}"
        if isinstance(e, Binary):
            p = self.prec_table[e.op]
            if e.op in ("==>", "<==>"):
                left, right = self.wrap(e.left, p + 1), self.wrap(e.right, p)
            elif e.op in _RELATIONS:
                left, right = self.wrap(e.left, p + 1), self.wrap(e.right, p + 1)
            else:
                left, right = self.wrap(e.left, p), self.wrap(e.right, p + 1)
            return f"{left} {e.op} {right}"
        if isinstance(e, Chain):
            parts = [self.wrap(e.operands[0], 6)]
            for op, operand in zip(e.ops, e.operands[1:]):
                parts.append(f"{op} {self.wrap(operand, 6)}")
            return " ".join(parts)
        if isinstance(e, Deref):
            return f"*{self.expr(e.target)}"
        if isinstance(e, AddrOf):
            return f"&{self.expr(e.target)}"
        if isinstance(e, Index):
            return f"{self.wrap(e.base, _ATOM)}[{self.expr(e.index)}]"
        if isinstance(e, Call):
            return f"{e.func}({', '.join(self.expr(a) for a in e.args)})"
        if isinstance(e, Builtin):
            return f"{e.name}({', '.join(self.expr(a) for a in e.args)})"
        if isinstance(e, Old):
            if e.at_form:
                return f"\\at({self.expr(e.expr)}, Pre)"
            return f"\\old({self.expr(e.expr)})"
        if isinstance(e, Result):
            return "\\result"
        if isinstance(e, Quant):
            return f"\\{e.kind} {type_text(e.var_type)} {e.var}; {self.expr(e.body)}"
        if isinstance(e, Cast):
            return f"({type_text(e.target)}){self.wrap(e.expr, _UNARY)}"
        if isinstance(e, ArrayInit):
            return "{" + ", ".join(self.expr(x) for x in e.elements) + "}"
        if isinstance(e, Nothing):
            return "\\nothing"
        raise TypeError(f"cannot print {type(e).__name__}")


def expr_text(e: Expr, logic: bool = True) -> str:
    return _ExprPrinter(logic).expr(e)


_LOGIC = _ExprPrinter(True)
_PROG = _ExprPrinter(False)


def _contract_lines(c: Contract) -> List[str]:
    lines = ["/*@"]
    for r in c.requires:
        lines.append(f"  @ requires {_LOGIC.expr(r)};")
    if c.assigns is not None:
        lines.append(f"  @ assigns {', '.join(_LOGIC.expr(a) for a in c.assigns)};")
    for b in c.behaviors:
        if b.name == DEFAULT_BEHAVIOR:
            for e in b.ensures:
                lines.append(f"  @ ensures {_LOGIC.expr(e)};")
    for b in c.behaviors:
        if b.name == DEFAULT_BEHAVIOR:
            continue
        lines.append(f"  @ behavior {b.name}:")
        for a in b.assumes:
            lines.append(f"  @   assumes {_LOGIC.expr(a)};")
        for e in b.ensures:
            lines.append(f"  @   ensures {_LOGIC.expr(e)};")
    if c.complete_declared:
        lines.append("  @ complete behaviors;")
    if c.disjoint_declared:
        lines.append("  @ disjoint behaviors;")
    lines.append("  @*/")
    return lines


def _param_text(p: Param) -> str:
    return f"{type_text(p.type)}{'*' if p.out else ''} {p.name}"


class _StmtPrinter:
    def __init__(self) -> None:
        self.lines: List[str] = []

    def emit(self, depth: int, text: str) -> None:
        self.lines.append("    " * depth + text)

    def simple(self, s: Stmt) -> str:
        if isinstance(s, Assign):
            return f"{_PROG.expr(s.target)} = {_PROG.expr(s.value)}"
        if isinstance(s, LocalDecl):
            init = f" = {_PROG.expr(s.init)}" if s.init is not None else ""
            return f"{_decl(s.type, s.name)}{init}"
        if isinstance(s, ExprStmt):
            return _PROG.expr(s.expr)
        raise TypeError(f"not a simple statement: {type(s).__name__}")

    def stmt(self, s: Stmt, depth: int) -> None:
        if isinstance(s, Block):
            self.emit(depth, "{")
            for x in s.stmts:
                self.stmt(x, depth + 1)
            self.emit(depth, "}")
        elif isinstance(s, Assign) and s.ghost:
            self.emit(depth, f"//@ ghost {self.simple(s)};")
        elif isinstance(s, (Assign, LocalDecl, ExprStmt)):
            self.emit(depth, self.simple(s) + ";")
        elif isinstance(s, Assert):
            self.emit(depth, f"//@ assert {_LOGIC.expr(s.expr)};")
        elif isinstance(s, If):
            self.emit(depth, f"if ({_PROG.expr(s.cond)})")
            self.sub(s.then, depth)
            if s.orelse is not None:
                self.emit(depth, "else")
                self.sub(s.orelse, depth)
        elif isinstance(s, While):
            for inv in s.invariants:
                self.emit(depth, f"//@ loop invariant {_LOGIC.expr(inv)};")
            self.emit(depth, f"while ({_PROG.expr(s.cond)})")
            self.sub(s.body, depth)
        elif isinstance(s, For):
            for inv in s.invariants:
                self.emit(depth, f"//@ loop invariant {_LOGIC.expr(inv)};")
            init = self.simple(s.init) if s.init is not None else ""
            cond = _PROG.expr(s.cond) if s.cond is not None else ""
            step = self.simple(s.step) if s.step is not None else ""
            self.emit(depth, f"for ({init}; {cond}; {step})")
            self.sub(s.body, depth)
        elif isinstance(s, Return):
            self.emit(depth, "return;" if s.value is None else f"return {_PROG.expr(s.value)};")
        elif isinstance(s, ExternEffect):
            self.emit(depth, "extern_effect;")
        else:
            raise TypeError(f"cannot print {type(s).__name__}")

    def sub(self, s: Stmt, depth: int) -> None:
        if isinstance(s, Block):
            self.stmt(s, depth)
        else:
            self.stmt(s, depth + 1)


def pretty(p: Program) -> str:
    """Render a Program (parsed or resolved) back to source text."""
    out: List[str] = []
    module = p.modules[0] if p.modules else None
    if module:
        out.append(f"module {module};")
        out.append("")
    for c in p.constants:
        out.append(f"const {_decl(c.type, c.name)} = {_PROG.expr(c.value)};")
    for g in p.ghost_decls:
        init = f" = {_PROG.expr(g.init)}" if g.init is not None else ""
        out.append(f"//@ ghost {_decl(g.type, g.name)}{init};")
    for pr in p.predicates:
        params = ", ".join(_param_text(x) for x in pr.params)
        out.append(f"/*@ predicate {pr.name}({params}) = {_LOGIC.expr(pr.body)}; @*/")
    for lf in p.logic_functions:
        params = ", ".join(_param_text(x) for x in lf.params)
        out.append(f"/*@ logic {type_text(lf.ret)} {lf.name}({params}) = "
                   f"{_LOGIC.expr(lf.body)}; @*/")
    for mv in p.module_vars:
        init = f" = {_PROG.expr(mv.init)}" if mv.init is not None else ""
        out.append(f"{'static ' if mv.static else ''}{_decl(mv.type, mv.name)}{init};")
    for fn in p.functions:
        out.append("")
        out.extend(_function_lines(fn))
    return "\n".join(out) + "\n"


def _function_lines(fn: FunctionDef) -> List[str]:
    lines: List[str] = []
    if fn.contract is not None:
        lines.extend(_contract_lines(fn.contract))
    params = ", ".join(_param_text(p) for p in fn.params) or "void"
    head = f"{'hardware ' if fn.hardware else ''}{type_text(fn.ret)} {fn.name}({params})"
    if fn.body is None:
        lines.append(head + ";")
        return lines
    lines.append(head)
    sp = _StmtPrinter()
    sp.stmt(fn.body, 0)
    lines.extend(sp.lines)
    return lines
