"""The temperature-monitoring example: sources, domains and scenarios."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from minispec.frontend import load_program
from minispec.verifier.config import DomainConfig
from minispec.verifier.scenario import Scenario, load_scenario

ROOT = Path(__file__).resolve().parent


@dataclass(frozen=True)
class FunctionInfo:
    name: str
    hardware: bool
    obligations: Optional[int]


@dataclass(frozen=True)
class CorpusManifest:
    files: Tuple[str, ...]
    variants: Mapping[str, str]
    domains: str
    scenarios: Tuple[str, ...]
    functions: Tuple[FunctionInfo, ...]
    constants: Mapping[str, Any]

    def path(self, rel: str) -> Path:
        return ROOT / rel

    @property
    def paths(self) -> List[Path]:
        return [ROOT / f for f in self.files]

    def variant_paths(self, variant: str) -> List[Path]:
        """Corpus files with ``cbit.mc`` replaced by the named variant."""
        if variant not in self.variants:
            raise KeyError(f"unknown variant '{variant}'; have {sorted(self.variants)}")
        return [ROOT / self.variants[variant] if f == "cbit.mc" else ROOT / f
                for f in self.files]


def load_manifest() -> CorpusManifest:
    data = json.loads((ROOT / "manifest.json").read_text(encoding="utf-8"))
    return CorpusManifest(
        files=tuple(data["files"]),
        variants=dict(data["variants"]),
        domains=data["domains"],
        scenarios=tuple(data["scenarios"]),
        functions=tuple(FunctionInfo(f["name"], f["hardware"], f["obligations"])
                        for f in data["functions"]),
        constants=dict(data["constants"]),
    )


def load_domains() -> DomainConfig:
    return DomainConfig.load(ROOT / load_manifest().domains)


def load_variant(variant: str):
    return load_program(load_manifest().variant_paths(variant))


def load_corpus():
    """Return ``(program, manifest, domain config, scenarios)``."""
    m = load_manifest()
    tp = load_program(m.paths)
    scenarios: Dict[str, Scenario] = {}
    for rel in m.scenarios:
        sc = load_scenario(ROOT / rel)
        scenarios[Path(rel).stem] = sc
    return tp, m, DomainConfig.load(ROOT / m.domains), scenarios
