"""Tokenizer for minispec sources.

Annotation comments (``//@ ...`` and ``/*@ ... @*/``) are not skipped: they
produce ``ANNOT_START``/``ANNOT_END`` tokens around their contents.  Inside
an annotation every ``@`` is whitespace, so the ACSL habit of starting each
line of a block with ``@`` needs no special handling in the parser.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

from minispec.errors import ParseError
from minispec.frontend.ast import SourceSpan

IDENT = "IDENT"
INT = "INT"
REAL = "REAL"
OP = "OP"
BSLASH = "BSLASH"           # \old, \result, ...
ANNOT_START = "ANNOT_START"
ANNOT_END = "ANNOT_END"
EOF = "EOF"

# Longest first.
OPERATORS = [
    "<==>", "==>", "::", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "&", "(", ")", "[", "]", "{", "}",
    ";", ",", ":", "?", ".",
]


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    span: SourceSpan

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.value!r}, {self.span})"


class Lexer:
    def __init__(self, text: str, file: str = "<input>"):
        self.text = text
        self.file = file
        self.pos = 0
        self.line = 1
        self.col = 1
        self.mode = None            # None | "line" | "block"
        self.tokens: List[Token] = []

    def _span(self, line: int, col: int) -> SourceSpan:
        # end position is inclusive: the last character of the token
        end_col = self.col - 1
        if self.line == line and end_col < col:
            end_col = col
        return SourceSpan(self.file, line, col, self.line, max(end_col, 1))

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _peek(self, s: str) -> bool:
        return self.text.startswith(s, self.pos)

    def _emit(self, kind: str, value: str, line: int, col: int) -> None:
        self.tokens.append(Token(kind, value, self._span(line, col)))

    def tokenize(self) -> List[Token]:
        text = self.text
        annot_open = None
        while self.pos < len(text):
            ch = text[self.pos]
            line, col = self.line, self.col

            if ch == "\n" and self.mode == "line":
                self._emit(ANNOT_END, "", line, col)
                self.mode = None
                self._advance()
                continue
            if ch.isspace():
                self._advance()
                continue

            if self.mode == "block" and (self._peek("@*/") or self._peek("*/")):
                self._advance(3 if ch == "@" else 2)
                self._emit(ANNOT_END, "@*/", line, col)
                self.mode = None
                continue
            if self.mode is not None and ch == "@":
                self._advance()
                continue

            if self._peek("/*@"):
                if self.mode is not None:
                    raise ParseError("nested annotation", self._here(line, col, 3))
                self._advance(3)
                self._emit(ANNOT_START, "/*@", line, col)
                self.mode = "block"
                annot_open = self.tokens[-1].span
                continue
            if self._peek("//@"):
                if self.mode is not None:
                    raise ParseError("nested annotation", self._here(line, col, 3))
                self._advance(3)
                self._emit(ANNOT_START, "//@", line, col)
                self.mode = "line"
                continue
            if self._peek("//"):
                while self.pos < len(text) and text[self.pos] != "\n":
                    self._advance()
                continue
            if self._peek("/*"):
                end = text.find("*/", self.pos + 2)
                if end < 0:
                    raise ParseError("unterminated comment", self._here(line, col, 2))
                self._advance(end + 2 - self.pos)
                continue

            if ch.isalpha() or ch == "_":
                start = self.pos
                while self.pos < len(text) and (text[self.pos].isalnum() or text[self.pos] == "_"):
                    self._advance()
                self._emit(IDENT, text[start:self.pos], line, col)
                continue

            if ch == "\\":
                start = self.pos
                self._advance()
                while self.pos < len(text) and (text[self.pos].isalnum() or text[self.pos] == "_"):
                    self._advance()
                if self.pos - start == 1:
                    raise ParseError("stray backslash", self._here(line, col, 1))
                self._emit(BSLASH, text[start:self.pos], line, col)
                continue

            if ch.isdigit() or (ch == "." and self.pos + 1 < len(text) and text[self.pos + 1].isdigit()):
                self._number(line, col)
                continue

            for op in OPERATORS:
                if self._peek(op):
                    self._advance(len(op))
                    self._emit(OP, op, line, col)
                    break
            else:
                raise ParseError(f"unexpected character {ch!r}", self._here(line, col, 1))

        if self.mode == "block":
            raise ParseError("unterminated annotation block", annot_open)
        if self.mode == "line":
            self._emit(ANNOT_END, "", self.line, self.col)
        self.tokens.append(Token(EOF, "", SourceSpan(self.file, self.line, self.col,
                                                     self.line, self.col)))
        return self.tokens

    def _here(self, line: int, col: int, width: int) -> SourceSpan:
        return SourceSpan(self.file, line, col, line, col + width - 1)

    def _number(self, line: int, col: int) -> None:
        text = self.text
        start = self.pos
        is_real = False
        if self._peek("0x") or self._peek("0X"):
            self._advance(2)
            while self.pos < len(text) and text[self.pos] in "0123456789abcdefABCDEF":
                self._advance()
            self._emit(INT, text[start:self.pos], line, col)
            return
        while self.pos < len(text) and text[self.pos].isdigit():
            self._advance()
        if self.pos < len(text) and text[self.pos] == "." and not self._peek(".."):
            is_real = True
            self._advance()
            while self.pos < len(text) and text[self.pos].isdigit():
                self._advance()
        if self.pos < len(text) and text[self.pos] in "eE":
            nxt = text[self.pos + 1:self.pos + 3]
            if nxt[:1].isdigit() or (nxt[:1] in "+-" and nxt[1:2].isdigit()):
                is_real = True
                self._advance(2)
                while self.pos < len(text) and text[self.pos].isdigit():
                    self._advance()
        if self.pos < len(text) and (text[self.pos].isalpha() or text[self.pos] == "_"):
            raise ParseError("malformed number", self._here(line, col, self.pos - start + 1))
        self._emit(REAL if is_real else INT, text[start:self.pos], line, col)


def tokenize(text: str, file: str = "<input>") -> List[Token]:
    return Lexer(text, file).tokenize()
