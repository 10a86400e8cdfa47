"""Lexer, parser, resolver and pretty printer for ``.mc`` sources."""

from pathlib import Path
from typing import Iterable, Union

from minispec.frontend.parser import module_name_for, parse_logic_expr, parse_source
from minispec.frontend.printer import expr_text, pretty
from minispec.frontend.resolver import TypedProgram, link, resolve, resolve_logic


def parse_files(paths: Iterable[Union[str, Path]]):
    """Parse and link several files into one Program (not yet resolved)."""
    programs = []
    for path in paths:
        path = Path(path)
        programs.append(parse_source(path.read_text(encoding="utf-8"), str(path)))
    return link(programs)


def load_program(paths: Iterable[Union[str, Path]]) -> TypedProgram:
    return resolve(parse_files(paths))


__all__ = ["parse_source", "parse_logic_expr", "parse_files", "load_program", "link",
           "resolve", "resolve_logic", "pretty", "expr_text", "module_name_for",
           "TypedProgram"]
