"""Generic traversal over AST nodes."""

from __future__ import annotations

import dataclasses
from typing import Iterator

from minispec.frontend.ast import Block, Expr, SourceSpan, Type


def children(node) -> Iterator[object]:
    for f in dataclasses.fields(node):
        value = getattr(node, f.name)
        if isinstance(value, (SourceSpan, Type)) or value is None:
            continue
        if isinstance(value, tuple):
            for v in value:
                if dataclasses.is_dataclass(v) and not isinstance(v, (Type, SourceSpan)):
                    yield v
        elif dataclasses.is_dataclass(value):
            yield value


def iter_nodes(node) -> Iterator[object]:
    """Pre-order traversal, including ``node`` itself."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(children(n))))


def iter_exprs(e: Expr) -> Iterator[Expr]:
    return iter_nodes(e)


def iter_stmts(b: Block) -> Iterator[object]:
    from minispec.frontend import ast
    stmt_types = (ast.Block, ast.LocalDecl, ast.Assign, ast.If, ast.While, ast.For,
                  ast.Return, ast.ExprStmt, ast.Assert, ast.ExternEffect)
    return (n for n in iter_nodes(b) if isinstance(n, stmt_types))
