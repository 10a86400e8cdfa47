"""Domain configuration for the bounded checker.

JSON layout::

    {
      "domains":  {"fn.param" | "param" | "var" | "module::var" | "ghost[i]":
                       {"range": [lo, hi], "step": k} | {"values": [...]}},
      "coupling": ["gWorkCond == cbit::WorkCondition", ...],
      "stubs":    {"fn": {"outputs": {"out": <domain>, "result": <domain>}}
                       | {"ghost_array": "gADC", "index": "channel"}
                       | {"relation": [{"args": [...], "result": v, "outs": {...}}]}},
      "budget_ms": 30000,
      "max_states": 10000000
    }

Values may be integers, reals, booleans or names of program constants.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Mapping, Optional, Sequence, Tuple, Union

from minispec.errors import ConfigError

DEFAULT_BUDGET_MS = 30_000
DEFAULT_MAX_STATES = 10_000_000


@dataclass(frozen=True)
class Domain:
    """A finite, ordered list of values (order = enumeration order)."""
    values: Tuple[Any, ...]
    source: str = ""

    def __len__(self) -> int:
        return len(self.values)

    @staticmethod
    def parse(spec: Any, where: str = "") -> "Domain":
        if isinstance(spec, Domain):
            return spec
        if isinstance(spec, (list, tuple)):
            return Domain(tuple(spec), f"values {list(spec)}")
        if not isinstance(spec, Mapping):
            raise ConfigError(f"{where}: domain must be an object, got {spec!r}")
        if "range" in spec:
            rng = spec["range"]
            step = spec.get("step", 1)
            if (not isinstance(rng, (list, tuple)) or len(rng) != 2
                    or not all(isinstance(x, int) for x in rng) or not isinstance(step, int)
                    or step < 1):
                raise ConfigError(f"{where}: range must be [lo, hi] of integers, step >= 1")
            lo, hi = rng
            if lo > hi:
                raise ConfigError(f"{where}: empty range [{lo}, {hi}]")
            text = f"[{lo}, {hi}]" + (f" step {step}" if step != 1 else "")
            return Domain(tuple(range(lo, hi + 1, step)), text)
        if "values" in spec:
            vals = spec["values"]
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"{where}: values must be a non-empty list")
            return Domain(tuple(vals), "{" + ", ".join(str(v) for v in vals) + "}")
        raise ConfigError(f"{where}: domain needs 'range' or 'values'")

    def bind(self, consts: Mapping[str, Any], where: str = "") -> "Domain":
        """Replace constant names by their values."""
        out = []
        for v in self.values:
            if isinstance(v, str):
                if v not in consts:
                    raise ConfigError(f"{where}: unknown constant '{v}' in domain")
                v = consts[v]
            out.append(v)
        return Domain(tuple(out), self.source)


@dataclass(frozen=True)
class StubSpec:
    kind: str                                   # outputs | ghost_array | relation
    outputs: Tuple[Tuple[str, Domain], ...] = ()
    array: str = ""
    index: str = ""
    relation: Tuple[Tuple[Tuple[Any, ...], Any, Tuple[Tuple[str, Any], ...]], ...] = ()

    @staticmethod
    def parse(name: str, spec: Mapping[str, Any]) -> "StubSpec":
        if not isinstance(spec, Mapping):
            raise ConfigError(f"stub {name}: must be an object")
        if "outputs" in spec:
            outs = tuple((k, Domain.parse(v, f"stub {name}.{k}"))
                         for k, v in spec["outputs"].items())
            return StubSpec("outputs", outputs=outs)
        if "ghost_array" in spec:
            if "index" not in spec:
                raise ConfigError(f"stub {name}: ghost_array needs 'index'")
            return StubSpec("ghost_array", array=spec["ghost_array"], index=spec["index"])
        if "relation" in spec:
            rows = []
            for row in spec["relation"]:
                rows.append((tuple(row.get("args", [])), row.get("result"),
                             tuple(sorted(row.get("outs", {}).items()))))
            return StubSpec("relation", relation=tuple(rows))
        raise ConfigError(f"stub {name}: needs 'outputs', 'ghost_array' or 'relation'")

    def describe(self) -> str:
        if self.kind == "outputs":
            return "outputs " + ", ".join(f"{k} in {d.source}" for k, d in self.outputs)
        if self.kind == "ghost_array":
            return f"returns {self.array}[{self.index}]"
        return f"relation of {len(self.relation)} row(s)"


@dataclass(frozen=True)
class DomainConfig:
    domains: Mapping[str, Domain] = field(default_factory=dict)
    coupling: Tuple[str, ...] = ()
    stubs: Mapping[str, StubSpec] = field(default_factory=dict)
    budget_ms: int = DEFAULT_BUDGET_MS
    max_states: int = DEFAULT_MAX_STATES

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> "DomainConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("domain config must be a JSON object")
        unknown = set(data) - {"domains", "coupling", "stubs", "budget_ms", "max_states"}
        if unknown:
            raise ConfigError(f"unknown domain config keys: {sorted(unknown)}")
        domains = {k: Domain.parse(v, k) for k, v in data.get("domains", {}).items()}
        coupling = data.get("coupling", [])
        if not isinstance(coupling, list) or not all(isinstance(c, str) for c in coupling):
            raise ConfigError("coupling must be a list of expression strings")
        stubs = {k: StubSpec.parse(k, v) for k, v in data.get("stubs", {}).items()}
        budget = data.get("budget_ms", DEFAULT_BUDGET_MS)
        max_states = data.get("max_states", DEFAULT_MAX_STATES)
        for key, v in (("budget_ms", budget), ("max_states", max_states)):
            if not isinstance(v, int) or v <= 0:
                raise ConfigError(f"{key} must be a positive integer")
        return DomainConfig(domains, tuple(coupling), stubs, budget, max_states)

    @staticmethod
    def load(path: Union[str, Path]) -> "DomainConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        return DomainConfig.from_dict(data)

    def with_domains(self, **domains) -> "DomainConfig":
        """Copy with some domains replaced (keys as in the JSON file)."""
        merged = dict(self.domains)
        for k, v in domains.items():
            merged[k] = Domain.parse(v, k)
        return DomainConfig(merged, self.coupling, self.stubs, self.budget_ms, self.max_states)

    def replace(self, **kw) -> "DomainConfig":
        fields = dict(domains=self.domains, coupling=self.coupling, stubs=self.stubs,
                      budget_ms=self.budget_ms, max_states=self.max_states)
        for k, v in kw.items():
            if k == "domains":
                v = {dk: Domain.parse(dv, dk) for dk, dv in v.items()}
            elif k == "stubs":
                v = {sk: StubSpec.parse(sk, sv) if not isinstance(sv, StubSpec) else sv
                     for sk, sv in v.items()}
            elif k == "coupling":
                v = tuple(v)
            fields[k] = v
        return DomainConfig(**fields)

    def param_domain(self, fn: str, param: str) -> Optional[Domain]:
        return self.domains.get(f"{fn}.{param}") or self.domains.get(param)

    def state_domain(self, name: str, module: Optional[str]) -> Optional[Domain]:
        if module is not None:
            d = self.domains.get(f"{module}::{name}")
            if d is not None:
                return d
        return self.domains.get(name)

    def element_domains(self, array: str) -> List[Tuple[int, Domain]]:
        out = []
        prefix = array + "["
        for k, d in self.domains.items():
            if k.startswith(prefix) and k.endswith("]"):
                try:
                    out.append((int(k[len(prefix):-1]), d))
                except ValueError:
                    raise ConfigError(f"bad element domain key '{k}'") from None
        return sorted(out, key=lambda x: x[0])


def describe_assumptions(dc: DomainConfig, stub_names: Sequence[str] = ()) -> List[str]:
    out = [f"coupling: {c}" for c in dc.coupling]
    for name in sorted(stub_names):
        if name in dc.stubs:
            out.append(f"stub {name}: {dc.stubs[name].describe()}")
    return out
