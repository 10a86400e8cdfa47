"""Exception hierarchy shared by every stage of the toolchain."""

from __future__ import annotations

from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from minispec.frontend.ast import SourceSpan


class MinispecError(Exception):
    """Base class. ``span`` is set whenever the error points into source text."""

    def __init__(self, message: str, span: Optional[SourceSpan] = None):
        self.message = message
        self.span = span
        super().__init__(self.render())

    def render(self) -> str:
        if self.span is None:
            return self.message
        return f"{self.span}: {self.message}"


# -- frontend ---------------------------------------------------------------

class ParseError(MinispecError):
    pass


class ResolveError(MinispecError):
    pass


class UndefinedName(ResolveError):
    def __init__(self, name: str, span: Optional[SourceSpan] = None, hint: str = ""):
        self.name = name
        msg = f"undefined name '{name}'"
        if hint:
            msg += f" ({hint})"
        super().__init__(msg, span)


class TypeMismatch(ResolveError):
    def __init__(self, expected: str, found: str, span: Optional[SourceSpan] = None,
                 context: str = ""):
        self.expected = expected
        self.found = found
        msg = f"type mismatch: expected {expected}, found {found}"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg, span)


class DuplicateName(ResolveError):
    def __init__(self, name: str, span: Optional[SourceSpan] = None):
        self.name = name
        super().__init__(f"duplicate name '{name}'", span)


class GhostLeak(ResolveError):
    """Concrete code reads ghost state, so erasing ghosts would change it."""

    def __init__(self, name: str, span: Optional[SourceSpan] = None):
        self.name = name
        super().__init__(f"concrete code reads ghost name '{name}'", span)


# -- semantics --------------------------------------------------------------

class EvalError(MinispecError):
    pass


class DivisionByZero(EvalError):
    pass


class OverflowInCheckedMode(EvalError):
    pass


class MissingSnapshot(EvalError):
    pass


class UnboundedQuantifier(EvalError):
    pass


class StepBudgetExceeded(EvalError):
    pass


class CalledHardwareFunction(EvalError):
    pass


class StubMissing(EvalError):
    pass


# -- verifier ---------------------------------------------------------------

class VerifierError(MinispecError):
    pass


class DomainMissing(VerifierError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no domain configured for free input '{name}'")


class HardwareFunction(VerifierError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"'{name}' is a hardware function and is excluded from verification")


class ConfigError(VerifierError):
    pass


# -- thermo -----------------------------------------------------------------

class ThermoError(MinispecError):
    pass


class DomainError(ThermoError):
    pass


class InvalidRange(ThermoError):
    pass


class OutOfRange(ThermoError):
    pass
