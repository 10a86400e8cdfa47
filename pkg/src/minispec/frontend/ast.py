"""AST node definitions for minispec sources.

Every node is a frozen dataclass with a ``span``.  Spans (and a few purely
presentational fields) are excluded from equality so two parses of the same
text, or a parse of its pretty-printed form, compare structurally equal.
The resolver fills in ``ty`` and ``binding`` by rebuilding nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union


@dataclass(frozen=True, order=True)
class SourceSpan:
    file: str
    line_start: int
    col_start: int
    line_end: int
    col_end: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line_start}:{self.col_start}"

    def merge(self, other: "SourceSpan") -> "SourceSpan":
        return SourceSpan(self.file, self.line_start, self.col_start,
                          other.line_end, other.col_end)

    def contains(self, line: int, col: int) -> bool:
        return (self.line_start, self.col_start) <= (line, col) <= (self.line_end, self.col_end)


NOSPAN = SourceSpan("<none>", 0, 0, 0, 0)


def _span() -> SourceSpan:
    return field(default=NOSPAN, compare=False, repr=False)


# -- types --------------------------------------------------------------------

@dataclass(frozen=True)
class Type:
    name: str                       # uint16 int32 integer real bool void array
    elem: Optional["Type"] = None
    size: Optional[int] = None

    def __str__(self) -> str:
        if self.name == "array":
            return f"{self.elem}[{self.size}]"
        return self.name

    @property
    def is_integral(self) -> bool:
        return self.name in ("uint16", "int32", "integer")

    @property
    def is_numeric(self) -> bool:
        return self.name in ("uint16", "int32", "integer", "real")


UINT16 = Type("uint16")
INT32 = Type("int32")
INTEGER = Type("integer")
REAL = Type("real")
BOOL = Type("bool")
VOID = Type("void")

# Source spellings accepted for each type.
TYPE_NAMES = {
    "uint16_t": UINT16, "uint16": UINT16,
    "int32_t": INT32, "int32": INT32, "int": INT32,
    "integer": INTEGER,
    "real": REAL, "double": REAL,
    "bool": BOOL, "boolean": BOOL,
    "void": VOID,
}

# Canonical spelling used by the pretty printer.
TYPE_SPELLING = {"uint16": "uint16_t", "int32": "int32_t", "integer": "integer",
                 "real": "real", "bool": "bool", "void": "void"}


def array_of(elem: Type, size: int) -> Type:
    return Type("array", elem, size)


# -- expressions ----------------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int
    span: SourceSpan = _span()
    ty: Optional[Type] = None


@dataclass(frozen=True)
class RealLit:
    value: float
    text: str = field(default="", compare=False)
    span: SourceSpan = _span()
    ty: Optional[Type] = None


@dataclass(frozen=True)
class BoolLit:
    value: bool
    span: SourceSpan = _span()
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Name:
    ident: str
    module: Optional[str] = None        # set for `module::ident`
    span: SourceSpan = _span()
    ty: Optional[Type] = None
    binding: Optional[str] = None       # const module ghost param local out lparam quant


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    span: SourceSpan = _span()
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: SourceSpan = _span()
    ty: Optional[Type] = None
    logic: bool = False                 # evaluated with unbounded math semantics


@dataclass(frozen=True)
class Chain:
    """``a >= b > c``: each operand evaluated once, comparisons conjoined."""
    ops: Tuple[str, ...]
    operands: Tuple["Expr", ...]
    span: SourceSpan = _span()
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Deref:
    target: Name
    span: SourceSpan = _span()
    ty: Optional[Type] = None


@dataclass(frozen=True)
class AddrOf:
    target: Name
    span: SourceSpan = _span()
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Index:
    base: "Expr"
    index: "Expr"
    span: SourceSpan = _span()
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple["Expr", ...]
    span: SourceSpan = _span()
    ty: Optional[Type] = None
    kind: Optional[str] = None          # function | predicate | logic


@dataclass(frozen=True)
class Builtin:
    name: str                           # including the leading backslash
    args: Tuple["Expr", ...]
    span: SourceSpan = _span()
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Old:
    expr: "Expr"
    at_form: bool = False               # written as \at(e, Pre)
    span: SourceSpan = _span()
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Result:
    span: SourceSpan = _span()
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Quant:
    kind: str                           # forall | exists
    var_type: Type
    var: str
    body: "Expr"
    span: SourceSpan = _span()
    ty: Optional[Type] = None
    lower: Optional["Expr"] = None      # inclusive bounds found by the resolver
    upper: Optional["Expr"] = None


@dataclass(frozen=True)
class Cast:
    target: Type
    expr: "Expr"
    span: SourceSpan = _span()
    ty: Optional[Type] = None


@dataclass(frozen=True)
class ArrayInit:
    elements: Tuple["Expr", ...]
    span: SourceSpan = _span()
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Nothing:
    """``\\nothing`` in an assigns clause."""
    span: SourceSpan = _span()
    ty: Optional[Type] = None


Expr = Union[IntLit, RealLit, BoolLit, Name, Unary, Binary, Chain, Deref, AddrOf,
             Index, Call, Builtin, Old, Result, Quant, Cast, ArrayInit, Nothing]


# -- statements -------------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    stmts: Tuple["Stmt", ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class LocalDecl:
    type: Type
    name: str
    init: Optional[Expr]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Assign:
    target: Expr                        # Name | Index | Deref
    value: Expr
    ghost: bool = False
    span: SourceSpan = _span()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    orelse: Optional["Stmt"]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Stmt"
    invariants: Tuple[Expr, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class For:
    init: Optional["Stmt"]
    cond: Optional[Expr]
    step: Optional["Stmt"]
    body: "Stmt"
    invariants: Tuple[Expr, ...] = ()
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Return:
    value: Optional[Expr]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Assert:
    expr: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ExternEffect:
    span: SourceSpan = _span()


Stmt = Union[Block, LocalDecl, Assign, If, While, For, Return, ExprStmt, Assert, ExternEffect]


# -- declarations ---------------------------------------------------------------------

@dataclass(frozen=True)
class Param:
    type: Type
    name: str
    out: bool = False                   # declared as `T* name`
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ConstDecl:
    type: Type
    name: str
    value: Expr
    module: str = ""
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ModuleVar:
    type: Type
    name: str
    init: Optional[Expr]
    static: bool = True
    module: str = ""
    span: SourceSpan = _span()


@dataclass(frozen=True)
class GhostDecl:
    type: Type
    name: str
    init: Optional[Expr]
    module: str = ""
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Predicate:
    name: str
    params: Tuple[Param, ...]
    body: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class LogicFunction:
    name: str
    ret: Type
    params: Tuple[Param, ...]
    body: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Behavior:
    name: str
    assumes: Tuple[Expr, ...] = ()
    ensures: Tuple[Expr, ...] = ()
    span: SourceSpan = _span()


DEFAULT_BEHAVIOR = "default"


@dataclass(frozen=True)
class Contract:
    """Top-level ensures live in a behavior named ``default`` with no assumes."""
    requires: Tuple[Expr, ...] = ()
    assigns: Optional[Tuple[Expr, ...]] = None
    behaviors: Tuple[Behavior, ...] = ()
    complete_declared: bool = False
    disjoint_declared: bool = False
    span: SourceSpan = _span()

    def named_behaviors(self) -> Tuple[Behavior, ...]:
        return tuple(b for b in self.behaviors if b.name != DEFAULT_BEHAVIOR)

    @property
    def is_empty(self) -> bool:
        return not (self.requires or self.assigns is not None or self.behaviors
                    or self.complete_declared or self.disjoint_declared)


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: Tuple[Param, ...]
    ret: Type
    body: Optional[Block]               # None for a prototype
    contract: Optional[Contract] = None
    hardware: bool = False
    module: str = ""
    span: SourceSpan = _span()

    def param(self, name: str) -> Optional[Param]:
        for p in self.params:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class Program:
    constants: Tuple[ConstDecl, ...] = ()
    module_vars: Tuple[ModuleVar, ...] = ()
    ghost_decls: Tuple[GhostDecl, ...] = ()
    predicates: Tuple[Predicate, ...] = ()
    logic_functions: Tuple[LogicFunction, ...] = ()
    functions: Tuple[FunctionDef, ...] = ()
    modules: Tuple[str, ...] = ()


Node = Union[Expr, Stmt, Param, ConstDecl, ModuleVar, GhostDecl, Predicate,
             LogicFunction, Behavior, Contract, FunctionDef]
