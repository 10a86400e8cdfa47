"""Recursive-descent parser producing an unresolved :class:`Program`.

Grammar summary (the full reference lives in docs/language.md)::

    file      ::= [ 'module' IDENT ';' ] { toplevel }
    toplevel  ::= annotation | const | var | function
    function  ::= { 'static' | 'hardware' } type IDENT '(' params ')' ( ';' | block )
    annotation::= '/*@' { annot-item } '@*/' | '//@' { annot-item } NEWLINE

Program expressions use C precedence without chained comparisons.  Logic
expressions (contracts, assertions, predicates) add ``==>``, ``<==>``,
backslash builtins, quantifiers and chained relations such as
``D(t) >= d > D(t + 1)``.
"""

from __future__ import annotations

import os
from typing import List, Optional, Tuple

from minispec.errors import ParseError
from minispec.frontend import lexer as L
from minispec.frontend.ast import (
    DEFAULT_BEHAVIOR, TYPE_NAMES, AddrOf, ArrayInit, Assert, Assign, Behavior, Binary,
    Block, BoolLit, Builtin, Call, Cast, Chain, ConstDecl, Contract, Deref, Expr,
    ExprStmt, ExternEffect, For, FunctionDef, GhostDecl, If, Index, IntLit, LocalDecl,
    LogicFunction, ModuleVar, Name, Nothing, Old, Param, Predicate, Program, Quant,
    RealLit, Result, Return, SourceSpan, Stmt, Type, Unary, While, array_of,
)

KEYWORDS = {"if", "else", "while", "for", "return", "const", "static", "hardware",
            "module", "extern_effect", "true", "false"} | set(TYPE_NAMES)

BUILTINS = {"\\abs": 1, "\\floor": 1, "\\exp": 1,
            "\\thermistor_R": 1, "\\thermistor_U": 1, "\\thermistor_D": 1}

CONTRACT_WORDS = {"requires", "ensures", "assigns", "assumes", "behavior",
                  "complete", "disjoint"}

RELATIONS = {"==", "!=", "<", "<=", ">", ">="}


class _ContractBuilder:
    def __init__(self, span: SourceSpan):
        self.span = span
        self.requires: List[Expr] = []
        self.assigns: Optional[List[Expr]] = None
        self.default_ensures: List[Expr] = []
        self.behaviors: List[list] = []      # [name, assumes, ensures, span]
        self.current: Optional[list] = None
        self.closed = False
        self.complete = False
        self.disjoint = False

    def build(self) -> Contract:
        behaviors = []
        if self.default_ensures:
            behaviors.append(Behavior(DEFAULT_BEHAVIOR, (), tuple(self.default_ensures),
                                      self.span))
        for name, assumes, ensures, span in self.behaviors:
            behaviors.append(Behavior(name, tuple(assumes), tuple(ensures), span))
        return Contract(
            requires=tuple(self.requires),
            assigns=None if self.assigns is None else tuple(self.assigns),
            behaviors=tuple(behaviors),
            complete_declared=self.complete,
            disjoint_declared=self.disjoint,
            span=self.span,
        )


class Parser:
    def __init__(self, tokens: List[L.Token], file: str, module: str):
        self.toks = tokens
        self.i = 0
        self.file = file
        self.module = module
        self.pending_contract: Optional[_ContractBuilder] = None
        self.pending_invariants: List[Expr] = []

        self.constants: List[ConstDecl] = []
        self.module_vars: List[ModuleVar] = []
        self.ghosts: List[GhostDecl] = []
        self.predicates: List[Predicate] = []
        self.logic_functions: List[LogicFunction] = []
        self.functions: List[FunctionDef] = []

    # -- token helpers ------------------------------------------------------------

    def peek(self, k: int = 0) -> L.Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> L.Token:
        tok = self.toks[self.i]
        if tok.kind != L.EOF:
            self.i += 1
        return tok

    def at(self, value: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind in (L.OP, L.IDENT, L.BSLASH) and tok.value == value

    def accept(self, value: str) -> Optional[L.Token]:
        if self.at(value):
            return self.next()
        return None

    def expect(self, value: str, what: str = "") -> L.Token:
        if self.at(value):
            return self.next()
        tok = self.peek()
        shown = tok.value or tok.kind.lower()
        raise ParseError(f"expected '{value}'{' ' + what if what else ''}, found '{shown}'",
                         tok.span)

    def expect_ident(self, what: str = "identifier") -> L.Token:
        tok = self.peek()
        if tok.kind != L.IDENT or tok.value in KEYWORDS:
            raise ParseError(f"expected {what}, found '{tok.value or tok.kind.lower()}'",
                             tok.span)
        return self.next()

    def error(self, message: str, tok: Optional[L.Token] = None) -> ParseError:
        return ParseError(message, (tok or self.peek()).span)

    def span_from(self, start: SourceSpan) -> SourceSpan:
        prev = self.toks[max(self.i - 1, 0)]
        return start.merge(prev.span)

    # -- types ------------------------------------------------------------------------

    def at_type(self, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind == L.IDENT and tok.value in TYPE_NAMES

    def parse_type(self) -> Type:
        tok = self.peek()
        if not self.at_type():
            raise self.error(f"expected a type, found '{tok.value or tok.kind.lower()}'")
        self.next()
        return TYPE_NAMES[tok.value]

    # -- file level ---------------------------------------------------------------------

    def parse_file(self) -> Program:
        if self.at("module"):
            self.next()
            self.module = self.expect_ident("module name").value
            self.expect(";")
        while self.peek().kind != L.EOF:
            tok = self.peek()
            if tok.kind == L.ANNOT_START:
                self.parse_top_annotation()
            elif self.at("module"):
                raise self.error("module directive must come first")
            elif self.at("const"):
                self.check_no_pending_contract()
                self.parse_const()
            elif self.at("static") or self.at("hardware") or self.at_type():
                self.parse_declaration()
            else:
                raise self.error(f"unexpected '{tok.value or tok.kind.lower()}' at top level")
        if self.pending_contract is not None:
            raise ParseError("contract is not followed by a function declaration",
                             self.pending_contract.span)
        return Program(
            constants=tuple(self.constants),
            module_vars=tuple(self.module_vars),
            ghost_decls=tuple(self.ghosts),
            predicates=tuple(self.predicates),
            logic_functions=tuple(self.logic_functions),
            functions=tuple(self.functions),
            modules=(self.module,),
        )

    def check_no_pending_contract(self) -> None:
        if self.pending_contract is not None:
            raise ParseError("contract is not followed by a function declaration",
                             self.pending_contract.span)

    def parse_const(self) -> None:
        start = self.expect("const").span
        ty = self.parse_type()
        name = self.expect_ident("constant name").value
        ty = self.parse_array_suffix(ty)
        self.expect("=")
        value = self.parse_initializer()
        self.expect(";")
        self.constants.append(ConstDecl(ty, name, value, self.module, self.span_from(start)))

    def parse_array_suffix(self, ty: Type) -> Type:
        if self.accept("["):
            tok = self.peek()
            if tok.kind != L.INT:
                raise self.error("array size must be an integer literal")
            self.next()
            self.expect("]")
            return array_of(ty, _int_value(tok))
        return ty

    def parse_initializer(self) -> Expr:
        if self.at("{"):
            start = self.next().span
            elems = []
            if not self.at("}"):
                elems.append(self.parse_expr())
                while self.accept(","):
                    if self.at("}"):
                        break
                    elems.append(self.parse_expr())
            self.expect("}")
            return ArrayInit(tuple(elems), self.span_from(start))
        return self.parse_expr()

    def parse_declaration(self) -> None:
        start = self.peek().span
        static = hardware = False
        while self.at("static") or self.at("hardware"):
            if self.next().value == "static":
                static = True
            else:
                hardware = True
        ty = self.parse_type()
        name_tok = self.expect_ident()
        if self.at("("):
            self.parse_function(start, ty, name_tok.value, hardware)
            return
        self.check_no_pending_contract()
        if hardware:
            raise self.error("'hardware' applies to functions only", name_tok)
        while True:
            vty = self.parse_array_suffix(ty)
            init = self.parse_initializer() if self.accept("=") else None
            self.module_vars.append(ModuleVar(vty, name_tok.value, init, static, self.module,
                                              self.span_from(start)))
            if not self.accept(","):
                break
            name_tok = self.expect_ident()
        self.expect(";")

    def parse_function(self, start: SourceSpan, ret: Type, name: str, hardware: bool) -> None:
        self.expect("(")
        params: List[Param] = []
        if self.at("void") and self.at(")", 1):
            self.next()
        elif not self.at(")"):
            params.append(self.parse_param())
            while self.accept(","):
                params.append(self.parse_param())
        self.expect(")")
        contract = None
        if self.pending_contract is not None:
            contract = self.pending_contract.build()
            self.pending_contract = None
        body = None
        if not self.accept(";"):
            if not self.at("{"):
                raise self.error("expected ';' or function body")
            body = self.parse_block()
            if self.pending_invariants:
                raise self.error("loop invariant is not followed by a loop")
        self.functions.append(FunctionDef(name, tuple(params), ret, body, contract, hardware,
                                          self.module, self.span_from(start)))

    def parse_param(self) -> Param:
        start = self.peek().span
        ty = self.parse_type()
        out = bool(self.accept("*"))
        name = self.expect_ident("parameter name").value
        return Param(ty, name, out, self.span_from(start))

    # -- annotations at file scope ------------------------------------------------------

    def parse_top_annotation(self) -> None:
        self.next()
        while self.peek().kind != L.ANNOT_END:
            tok = self.peek()
            if tok.kind == L.EOF:
                raise self.error("unterminated annotation")
            word = tok.value if tok.kind == L.IDENT else None
            if word in CONTRACT_WORDS:
                self.parse_contract_clause()
            elif word == "ghost":
                self.check_no_pending_contract()
                self.parse_ghost_decl()
            elif word == "predicate":
                self.check_no_pending_contract()
                self.parse_predicate()
            elif word == "logic":
                self.check_no_pending_contract()
                self.parse_logic_function()
            else:
                raise self.error(f"unsupported annotation '{tok.value or tok.kind.lower()}'")
        self.next()

    def parse_ghost_decl(self) -> None:
        start = self.expect("ghost").span
        ty = self.parse_type()
        while True:
            name = self.expect_ident("ghost name").value
            gty = self.parse_array_suffix(ty)
            init = self.parse_initializer() if self.accept("=") else None
            self.ghosts.append(GhostDecl(gty, name, init, self.module, self.span_from(start)))
            if not self.accept(","):
                break
        self.expect(";")

    def parse_logic_params(self) -> Tuple[Param, ...]:
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pstart = self.peek().span
                ty = self.parse_type()
                pname = self.expect_ident("parameter name").value
                params.append(Param(ty, pname, False, self.span_from(pstart)))
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(params)

    def parse_predicate(self) -> None:
        start = self.expect("predicate").span
        name = self.expect_ident("predicate name").value
        params = self.parse_logic_params()
        self.expect("=")
        body = self.parse_logic()
        self.expect(";")
        self.predicates.append(Predicate(name, params, body, self.span_from(start)))

    def parse_logic_function(self) -> None:
        start = self.expect("logic").span
        ret = self.parse_type()
        name = self.expect_ident("logic function name").value
        params = self.parse_logic_params()
        self.expect("=")
        body = self.parse_logic()
        self.expect(";")
        self.logic_functions.append(LogicFunction(name, ret, params, body, self.span_from(start)))

    def parse_contract_clause(self) -> None:
        tok = self.peek()
        if self.pending_contract is None:
            self.pending_contract = _ContractBuilder(tok.span)
        cb = self.pending_contract
        word = self.next().value
        if cb.closed and word not in ("complete", "disjoint"):
            raise ParseError(f"'{word}' after complete/disjoint declarations", tok.span)
        if word == "requires":
            if cb.current is not None:
                raise ParseError("requires inside a behavior is not supported", tok.span)
            cb.requires.append(self.parse_logic())
        elif word == "assigns":
            if cb.current is not None:
                raise ParseError("assigns inside a behavior is not supported", tok.span)
            if cb.assigns is not None:
                raise ParseError("duplicate assigns clause", tok.span)
            cb.assigns = self.parse_assigns_targets()
        elif word == "ensures":
            target = cb.default_ensures if cb.current is None else cb.current[2]
            target.append(self.parse_logic())
        elif word == "assumes":
            if cb.current is None:
                raise ParseError("assumes outside a behavior", tok.span)
            cb.current[1].append(self.parse_logic())
        elif word == "behavior":
            name = self.expect_ident("behavior name").value
            self.expect(":")
            cb.current = [name, [], [], tok.span]
            cb.behaviors.append(cb.current)
            return
        else:   # complete / disjoint
            self.expect("behaviors")
            if not self.at(";"):
                raise self.error("only the form 'complete behaviors;' is supported")
            cb.closed = True
            if word == "complete":
                cb.complete = True
            else:
                cb.disjoint = True
        self.expect(";")
        if cb.current is not None:
            cb.current[3] = cb.current[3].merge(self.toks[self.i - 1].span)

    def parse_assigns_targets(self) -> List[Expr]:
        targets = []
        while True:
            tok = self.peek()
            if tok.kind == L.BSLASH and tok.value == "\\nothing":
                self.next()
                targets.append(Nothing(tok.span))
            elif self.at("*"):
                self.next()
                name = self.parse_name_ref()
                targets.append(Deref(name, tok.span.merge(name.span)))
            else:
                targets.append(self.parse_name_ref())
            if not self.accept(","):
                break
        return targets

    def parse_name_ref(self) -> Name:
        tok = self.expect_ident()
        if self.accept("::"):
            ident = self.expect_ident()
            return Name(ident.value, tok.value, tok.span.merge(ident.span))
        return Name(tok.value, None, tok.span)

    # -- statements ----------------------------------------------------------------------

    def parse_block(self) -> Block:
        start = self.expect("{").span
        stmts: List[Stmt] = []
        while not self.at("}"):
            if self.peek().kind == L.EOF:
                raise self.error("unterminated block")
            stmts.extend(self.parse_statement())
        self.next()
        if self.pending_invariants:
            raise self.error("loop invariant is not followed by a loop")
        return Block(tuple(stmts), self.span_from(start))

    def parse_statement(self) -> List[Stmt]:
        tok = self.peek()
        if tok.kind == L.ANNOT_START:
            return self.parse_body_annotation()
        if self.pending_invariants and not (self.at("while") or self.at("for")):
            raise self.error("loop invariant is not followed by a loop")
        if self.at("{"):
            return [self.parse_block()]
        if self.at("if"):
            return [self.parse_if()]
        if self.at("while"):
            return [self.parse_while()]
        if self.at("for"):
            return [self.parse_for()]
        if self.at("return"):
            self.next()
            value = None if self.at(";") else self.parse_expr()
            self.expect(";")
            return [Return(value, self.span_from(tok.span))]
        if self.at("extern_effect"):
            self.next()
            self.expect(";")
            return [ExternEffect(self.span_from(tok.span))]
        if self.at_type():
            decls = self.parse_local_decls()
            self.expect(";")
            return decls
        stmt = self.parse_simple_statement()
        self.expect(";")
        return [stmt]

    def parse_local_decls(self) -> List[Stmt]:
        start = self.peek().span
        ty = self.parse_type()
        decls = []
        while True:
            name = self.expect_ident("variable name").value
            if self.at("["):
                raise self.error("local arrays are not supported")
            init = self.parse_expr() if self.accept("=") else None
            decls.append(LocalDecl(ty, name, init, self.span_from(start)))
            if not self.accept(","):
                break
        return decls

    def parse_simple_statement(self, ghost: bool = False) -> Stmt:
        start = self.peek().span
        target = self.parse_expr()
        op = self.peek()
        if self.accept("="):
            value = self.parse_expr()
        elif self.accept("+=") or self.accept("-="):
            rhs = self.parse_expr()
            value = Binary(op.value[0], target, rhs, self.span_from(start))
        elif self.accept("++") or self.accept("--"):
            value = Binary(op.value[0], target, IntLit(1, op.span), self.span_from(start))
        else:
            if ghost:
                raise self.error("expected '=' in ghost statement")
            if not isinstance(target, Call):
                raise self.error("expected an assignment or a function call")
            return ExprStmt(target, self.span_from(start))
        if not isinstance(target, (Name, Index, Deref)):
            raise ParseError("invalid assignment target", target.span)
        return Assign(target, value, ghost, self.span_from(start))

    def parse_if(self) -> If:
        start = self.expect("if").span
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then = self.parse_sub_statement()
        orelse = None
        if self.accept("else"):
            orelse = self.parse_sub_statement()
        return If(cond, then, orelse, self.span_from(start))

    def parse_sub_statement(self) -> Stmt:
        stmts = self.parse_statement()
        while not stmts:
            # an annotation holding only loop invariants; the loop follows
            stmts = self.parse_statement()
        if len(stmts) == 1:
            return stmts[0]
        return Block(tuple(stmts), stmts[0].span.merge(stmts[-1].span))

    def take_invariants(self) -> Tuple[Expr, ...]:
        inv = tuple(self.pending_invariants)
        self.pending_invariants = []
        return inv

    def parse_while(self) -> While:
        invariants = self.take_invariants()
        start = self.expect("while").span
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        body = self.parse_sub_statement()
        return While(cond, body, invariants, self.span_from(start))

    def parse_for(self) -> For:
        invariants = self.take_invariants()
        start = self.expect("for").span
        self.expect("(")
        init = None
        if not self.at(";"):
            if self.at_type():
                decls = self.parse_local_decls()
                if len(decls) != 1:
                    raise self.error("for-loop initializer declares one variable")
                init = decls[0]
            else:
                init = self.parse_simple_statement()
        self.expect(";")
        cond = None if self.at(";") else self.parse_expr()
        self.expect(";")
        step = None if self.at(")") else self.parse_simple_statement()
        self.expect(")")
        body = self.parse_sub_statement()
        return For(init, cond, step, body, invariants, self.span_from(start))

    def parse_body_annotation(self) -> List[Stmt]:
        self.next()
        out: List[Stmt] = []
        while self.peek().kind != L.ANNOT_END:
            tok = self.peek()
            if tok.kind == L.EOF:
                raise self.error("unterminated annotation")
            if self.at("ghost"):
                self.next()
                if self.at_type():
                    raise self.error("ghost declarations belong at file scope")
                out.append(self.parse_simple_statement(ghost=True))
                out[-1] = _with_span(out[-1], tok.span.merge(self.peek().span))
                self.expect(";")
            elif self.at("assert"):
                self.next()
                expr = self.parse_logic()
                self.expect(";")
                out.append(Assert(expr, self.span_from(tok.span)))
            elif self.at("loop"):
                self.next()
                self.expect("invariant")
                self.pending_invariants.append(self.parse_logic())
                self.expect(";")
            else:
                raise self.error(f"unsupported annotation '{tok.value or tok.kind.lower()}'")
        self.next()
        if out and self.pending_invariants:
            raise self.error("loop invariant is not followed by a loop")
        return out

    # -- expressions ---------------------------------------------------------------------

    def parse_expr(self) -> Expr:
        return self._binary_c(0)

    def parse_logic(self) -> Expr:
        return self._implies()

    _C_LEVELS = [("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="),
                 ("+", "-"), ("*", "/", "%")]

    def _operand_after(self, op: L.Token, parse):
        if not self.can_start_expr():
            raise ParseError(f"expected expression after '{op.value}'", op.span)
        return parse()

    def _binary_c(self, level: int) -> Expr:
        if level == len(self._C_LEVELS):
            return self._unary(logic=False)
        left = self._binary_c(level + 1)
        ops = self._C_LEVELS[level]
        while self.peek().kind == L.OP and self.peek().value in ops:
            op = self.next()
            right = self._operand_after(op, lambda: self._binary_c(level + 1))
            left = Binary(op.value, left, right, left.span.merge(right.span))
        return left

    def _implies(self) -> Expr:
        left = self._logic_or()
        if self.at("==>") or self.at("<==>"):
            op = self.next()
            right = self._operand_after(op, self._implies)   # right-associative
            return Binary(op.value, left, right, left.span.merge(right.span))
        return left

    def _logic_or(self) -> Expr:
        left = self._logic_and()
        while self.at("||"):
            op = self.next()
            right = self._operand_after(op, self._logic_and)
            left = Binary("||", left, right, left.span.merge(right.span))
        return left

    def _logic_and(self) -> Expr:
        left = self._relation()
        while self.at("&&"):
            op = self.next()
            right = self._operand_after(op, self._relation)
            left = Binary("&&", left, right, left.span.merge(right.span))
        return left

    def _relation(self) -> Expr:
        first = self._logic_arith(0)
        ops: List[str] = []
        operands = [first]
        while self.peek().kind == L.OP and self.peek().value in RELATIONS:
            op = self.next()
            ops.append(op.value)
            operands.append(self._operand_after(op, lambda: self._logic_arith(0)))
        if not ops:
            return first
        span = operands[0].span.merge(operands[-1].span)
        if len(ops) == 1:
            return Binary(ops[0], operands[0], operands[1], span)
        return Chain(tuple(ops), tuple(operands), span)

    _ARITH_LEVELS = [("+", "-"), ("*", "/", "%")]

    def _logic_arith(self, level: int) -> Expr:
        if level == len(self._ARITH_LEVELS):
            return self._unary(logic=True)
        left = self._logic_arith(level + 1)
        ops = self._ARITH_LEVELS[level]
        while self.peek().kind == L.OP and self.peek().value in ops:
            op = self.next()
            right = self._operand_after(op, lambda: self._logic_arith(level + 1))
            left = Binary(op.value, left, right, left.span.merge(right.span))
        return left

    def can_start_expr(self) -> bool:
        tok = self.peek()
        if tok.kind in (L.INT, L.REAL, L.BSLASH):
            return True
        if tok.kind == L.IDENT:
            return True
        return tok.kind == L.OP and tok.value in ("(", "-", "!", "+", "*", "&")

    def _unary(self, logic: bool) -> Expr:
        tok = self.peek()
        if tok.kind == L.OP and tok.value in ("-", "!", "+", "*", "&"):
            self.next()
            if tok.value in ("*", "&"):
                name_tok = self.peek()
                if name_tok.kind != L.IDENT:
                    raise ParseError(f"'{tok.value}' applies to a parameter or variable name",
                                     tok.span)
                name = self.parse_name_ref()
                span = tok.span.merge(name.span)
                return Deref(name, span) if tok.value == "*" else AddrOf(name, span)
            operand = self._operand_after(tok, lambda: self._unary(logic))
            if tok.value == "+":
                return operand
            return Unary(tok.value, operand, tok.span.merge(operand.span))
        if (tok.kind == L.OP and tok.value == "(" and self.at_type(1)
                and self.peek(2).kind == L.OP and self.peek(2).value == ")"):
            self.next()
            ty = self.parse_type()
            self.expect(")")
            operand = self._operand_after(tok, lambda: self._unary(logic))
            return Cast(ty, operand, tok.span.merge(operand.span))
        return self._postfix(logic)

    def _postfix(self, logic: bool) -> Expr:
        expr = self._primary(logic)
        while self.at("["):
            self.next()
            index = self.parse_logic() if logic else self.parse_expr()
            end = self.expect("]")
            expr = Index(expr, index, expr.span.merge(end.span))
        return expr

    def _args(self, logic: bool) -> Tuple[Tuple[Expr, ...], L.Token]:
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                args.append(self.parse_logic() if logic else self.parse_expr())
                if not self.accept(","):
                    break
        end = self.expect(")")
        return tuple(args), end

    def _primary(self, logic: bool) -> Expr:
        tok = self.peek()
        if tok.kind == L.INT:
            self.next()
            return IntLit(_int_value(tok), tok.span)
        if tok.kind == L.REAL:
            self.next()
            return RealLit(float(tok.value), tok.value, tok.span)
        if tok.kind == L.IDENT:
            if tok.value in ("true", "false"):
                self.next()
                return BoolLit(tok.value == "true", tok.span)
            if tok.value in KEYWORDS:
                raise self.error(f"unexpected keyword '{tok.value}'")
            if self.at("(", 1):
                self.next()
                args, end = self._args(logic)
                return Call(tok.value, args, tok.span.merge(end.span))
            return self.parse_name_ref()
        if tok.kind == L.BSLASH:
            if not logic:
                raise self.error(f"'{tok.value}' is only allowed in annotations")
            return self._builtin()
        if tok.kind == L.OP and tok.value == "(":
            self.next()
            inner = self.parse_logic() if logic else self.parse_expr()
            self.expect(")")
            return inner
        shown = tok.value or tok.kind.lower()
        raise self.error(f"expected expression, found '{shown}'")

    def _builtin(self) -> Expr:
        tok = self.next()
        word = tok.value
        if word == "\\result":
            return Result(tok.span)
        if word in ("\\true", "\\false"):
            return BoolLit(word == "\\true", tok.span)
        if word == "\\old":
            self.expect("(")
            inner = self.parse_logic()
            end = self.expect(")")
            return Old(inner, False, tok.span.merge(end.span))
        if word == "\\at":
            self.expect("(")
            inner = self.parse_logic()
            self.expect(",")
            label = self.expect_ident("label")
            if label.value != "Pre":
                raise ParseError(f"unsupported label '{label.value}' (only Pre)", label.span)
            end = self.expect(")")
            return Old(inner, True, tok.span.merge(end.span))
        if word in ("\\forall", "\\exists"):
            ty = self.parse_type()
            var = self.expect_ident("bound variable").value
            self.expect(";")
            body = self.parse_logic()
            return Quant(word[1:], ty, var, body, tok.span.merge(body.span))
        if word in BUILTINS:
            args, end = self._args(logic=True)
            if len(args) != BUILTINS[word]:
                raise ParseError(f"{word} takes {BUILTINS[word]} argument(s)", tok.span)
            return Builtin(word, args, tok.span.merge(end.span))
        if word == "\\nothing":
            raise ParseError("\\nothing is only allowed in assigns clauses", tok.span)
        raise ParseError(f"unsupported construct '{word}'", tok.span)


def _int_value(tok: L.Token) -> int:
    return int(tok.value, 0) if tok.value.lower().startswith("0x") else int(tok.value)


def _with_span(stmt: Stmt, span: SourceSpan) -> Stmt:
    from dataclasses import replace
    return replace(stmt, span=span)


def module_name_for(file: str) -> str:
    stem = os.path.splitext(os.path.basename(file))[0]
    return stem or "main"


def parse_source(text: str, file: str = "<input>") -> Program:
    """Parse one source file.  The module name defaults to the file stem."""
    tokens = L.tokenize(text, file)
    return Parser(tokens, file, module_name_for(file)).parse_file()


def parse_logic_expr(text: str, file: str = "<expr>") -> Expr:
    """Parse a standalone logic expression (coupling assumptions, expectations)."""
    tokens = L.tokenize(text, file)
    p = Parser(tokens, file, "")
    expr = p.parse_logic()
    if p.peek().kind != L.EOF:
        raise p.error(f"unexpected '{p.peek().value}' after expression")
    return expr
