"""Stand-ins for called functions: enumerated outputs, ghost-array reads, relations."""

from __future__ import annotations

from typing import Any, Callable, Dict, List, Mapping, Set, Tuple

from minispec.errors import ConfigError, EvalError, StubMissing
from minispec.frontend.ast import Call, FunctionDef, Name
from minispec.frontend.walk import iter_nodes
from minispec.verifier.config import DomainConfig, StubSpec

StubFn = Callable[[Tuple[Any, ...], Dict[str, Any]], Tuple[Any, Mapping[str, Any]]]


def callees(fn: FunctionDef) -> List[str]:
    out: List[str] = []
    if fn.body is None:
        return out
    for n in iter_nodes(fn.body):
        if isinstance(n, Call) and n.kind == "function" and n.func not in out:
            out.append(n.func)
    return out


def reachable(tp, fn_name: str, stubbed: Set[str]) -> List[str]:
    """Functions executed (or stubbed) when running ``fn_name``, in discovery order."""
    seen: List[str] = []
    todo = [fn_name]
    while todo:
        name = todo.pop(0)
        for callee in callees(tp.function(name)):
            if callee in seen or callee == fn_name:
                continue
            seen.append(callee)
            if callee not in stubbed:
                todo.append(callee)
    return seen


def output_keys(tp, name: str, spec: StubSpec) -> List[Tuple[str, Any]]:
    fn = tp.function(name)
    outs = {p.name for p in fn.params if p.out}
    keys = []
    for out, dom in spec.outputs:
        if out == "result":
            if fn.ret.name == "void":
                raise ConfigError(f"stub {name}: 'result' given for a void function")
        elif out not in outs:
            raise ConfigError(f"stub {name}: '{out}' is not an out parameter")
        keys.append((out, dom))
    return keys


def make_stub(tp, name: str, spec: StubSpec, point: Dict[Tuple[str, str], Any]) -> StubFn:
    """Build a stub.  ``point`` holds enumerated outputs keyed by (function, output)."""
    fn = tp.function(name)
    if spec.kind == "outputs":
        outs = [o for o, _ in spec.outputs if o != "result"]
        has_result = any(o == "result" for o, _ in spec.outputs)

        def outputs_stub(args, state):
            result = point[(name, "result")] if has_result else None
            return result, {o: point[(name, o)] for o in outs}
        return outputs_stub
    if spec.kind == "ghost_array":
        value_params = [p.name for p in fn.params if not p.out]
        if spec.index not in value_params:
            raise ConfigError(f"stub {name}: '{spec.index}' is not a parameter")
        pos = value_params.index(spec.index)
        array = spec.array
        if tp.ghost(array) is None:
            raise ConfigError(f"stub {name}: no ghost array '{array}'")

        def array_stub(args, state):
            arr, i = state[array], args[pos]
            if not 0 <= i < len(arr):
                raise EvalError(f"stub {name}: index {i} out of bounds for {array}")
            return arr[i], {}
        return array_stub
    table = {tuple(a): (r, dict(o)) for a, r, o in spec.relation}

    def relation_stub(args, state):
        try:
            return table[tuple(args)]
        except KeyError:
            raise StubMissing(f"stub {name}: no relation row for arguments {list(args)}") \
                from None
    return relation_stub


def injected(name: str, values: Mapping[str, Any]) -> StubFn:
    result = values.get("result")
    outs = {k: v for k, v in values.items() if k != "result"}
    return lambda args, state: (result, outs)


def active_stubs(tp, dc: DomainConfig, fn_name: str) -> Dict[str, StubSpec]:
    """Stub specs that apply when checking ``fn_name`` (never the function itself)."""
    return {k: v for k, v in dc.stubs.items() if k != fn_name and tp.has_function(k)}


def ghost_arrays_read(specs: Mapping[str, StubSpec]) -> Set[str]:
    return {s.array for s in specs.values() if s.kind == "ghost_array"}


def state_names(node) -> Set[str]:
    return {n.ident for n in iter_nodes(node)
            if isinstance(n, Name) and n.binding in ("module", "ghost")}
