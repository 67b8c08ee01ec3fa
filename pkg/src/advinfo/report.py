"""Structured run reports: one JSON object per run."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

from . import __version__


@dataclass
class Report:
    scenario: str
    inputs: dict[str, Any]
    results: dict[str, Any]
    checks: dict[str, bool] = field(default_factory=dict)
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "inputs": self.inputs,
            "results": self.results,
            "checks": self.checks,
            "version": self.version,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Report":
        missing = {"scenario", "inputs", "results", "checks", "version"} - set(data)
        if missing:
            raise ValueError(f"report is missing keys {sorted(missing)}")
        return cls(data["scenario"], data["inputs"], data["results"], data["checks"], data["version"])

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))


def exact(value: Fraction | int) -> dict[str, Any]:
    """A rational as both its exact text and its float value."""
    value = Fraction(value)
    return {"exact": str(value), "value": float(value)}


def table_records(table: Mapping[tuple[str, ...], float], names: Sequence[str], tol: float = 0.0) -> list[dict]:
    """Outcome table as a list of ``{name: outcome, ..., "p": probability}``."""
    out = []
    for key in sorted(table):
        p = table[key]
        if p > tol:
            rec = dict(zip(names, key))
            rec["p"] = float(p)
            out.append(rec)
    return out
