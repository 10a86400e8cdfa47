"""Runtime values: module state, pre-state snapshots, execution results."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Dict, Mapping, Optional, Tuple

from minispec.frontend.ast import SourceSpan, Type


def default_value(ty: Type):
    if ty.name == "array":
        return tuple(default_value(ty.elem) for _ in range(ty.size))
    if ty.name == "real":
        return 0.0
    if ty.name == "bool":
        return False
    return 0


@dataclass(frozen=True)
class ModuleState:
    """Concrete module variables and ghost state.  Arrays are tuples."""
    concrete: Mapping[str, Any] = field(default_factory=dict)
    ghost: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        overlap = set(self.concrete) & set(self.ghost)
        if overlap:
            raise ValueError(f"names in both concrete and ghost state: {sorted(overlap)}")

    def merged(self) -> Dict[str, Any]:
        d = dict(self.concrete)
        d.update(self.ghost)
        return d

    def with_values(self, **values) -> "ModuleState":
        concrete, ghost = dict(self.concrete), dict(self.ghost)
        for k, v in values.items():
            if k in ghost:
                ghost[k] = v
            elif k in concrete:
                concrete[k] = v
            else:
                raise KeyError(k)
        return ModuleState(concrete, ghost)

    @staticmethod
    def initial(tp) -> "ModuleState":
        """State as declared: initializers, zero-fill for missing values."""
        consts = tp.const_values
        from minispec.frontend.resolver import _fold

        def init(decl):
            if decl.init is None:
                return default_value(decl.type)
            v = _fold(decl.init, consts)
            if decl.type.name == "array":
                pad = decl.type.size - len(v)
                v = tuple(v) + (default_value(decl.type.elem),) * pad
                if decl.type.elem.name == "real":
                    v = tuple(float(x) for x in v)
            elif decl.type.name == "real":
                v = float(v)
            return v

        return ModuleState({m.name: init(m) for m in tp.module_vars},
                           {g.name: init(g) for g in tp.ghost_decls})

    @staticmethod
    def split(tp, values: Mapping[str, Any]) -> "ModuleState":
        ghosts = {g.name for g in tp.ghost_decls}
        return ModuleState({k: v for k, v in values.items() if k not in ghosts},
                           {k: v for k, v in values.items() if k in ghosts})


@dataclass(frozen=True)
class Snapshot:
    """Read-only copy of the state and arguments at function entry (label ``Pre``)."""
    state: Mapping[str, Any]
    args: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "state", MappingProxyType(dict(self.state)))
        object.__setattr__(self, "args", MappingProxyType(dict(self.args)))


@dataclass(frozen=True)
class AssertionFailure:
    kind: str                               # assert | invariant_init | invariant_preserve
    span: SourceSpan
    function: str
    text: str
    values: Tuple[Tuple[str, Any], ...] = ()
    detail: str = ""

    def render(self) -> str:
        vals = ", ".join(f"{k}={v!r}" for k, v in self.values)
        extra = f" ({self.detail})" if self.detail else ""
        return f"{self.span}: {self.kind} failed: {self.text}" + (f" [{vals}]" if vals else "") + extra


@dataclass(frozen=True)
class ExecResult:
    return_value: Optional[Any]
    out_params: Mapping[str, Any]
    post_state: ModuleState
    assertion_failures: Tuple[AssertionFailure, ...] = ()
    trace: Optional[Tuple[SourceSpan, ...]] = None
