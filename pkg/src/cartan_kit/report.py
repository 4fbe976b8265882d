"""Check records and verification reports shared by every verifier."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class CheckRecord:
    name: str
    ref: str
    max_residual: float
    threshold: float
    passed: bool
    stage: str = ""
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "ref": self.ref,
            "stage": self.stage,
            "max_residual": _finite(self.max_residual),
            "threshold": self.threshold,
            "pass": bool(self.passed),
            "note": self.note,
        }


def _finite(x: float):
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf"
    return x


def below(name: str, ref: str, residuals: Iterable[float], threshold: float, stage: str = "", note: str = "") -> CheckRecord:
    """Record that passes iff every residual is strictly below ``threshold``."""
    res = [float(r) for r in residuals]
    worst = max(res) if res else 0.0
    if any(np.isnan(r) for r in res):
        worst = float("nan")
    passed = bool(res == [] or (not np.isnan(worst) and worst < threshold))
    return CheckRecord(name, ref, worst, threshold, passed, stage, note)


def above(name: str, ref: str, values: Iterable[float], threshold: float, stage: str = "", note: str = "") -> CheckRecord:
    """Record for lower bounds (e.g. smallest singular values): passes iff min > threshold.

    ``max_residual`` then holds the observed minimum.
    """
    vals = [float(v) for v in values]
    worst = min(vals) if vals else float("inf")
    passed = bool(not np.isnan(worst) and worst > threshold)
    return CheckRecord(name, ref, worst, threshold, passed, stage, note or "lower bound: value must exceed threshold")


def flag(name: str, ref: str, ok: bool, stage: str = "", note: str = "") -> CheckRecord:
    return CheckRecord(name, ref, 0.0 if ok else 1.0, 0.5, bool(ok), stage, note)


@dataclass
class VerificationReport:
    scenario: str
    records: list[CheckRecord] = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    runtime: float | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def add(self, *records: CheckRecord) -> None:
        self.records.extend(records)

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def find(self, name: str) -> CheckRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def as_dict(self, include_runtime: bool = False) -> dict:
        out = {
            "scenario": self.scenario,
            "overall_pass": self.passed,
            "records": [r.as_dict() for r in self.records],
            "extras": self.extras,
        }
        if include_runtime and self.runtime is not None:
            out["runtime_s"] = self.runtime
        return out

    def to_json(self, include_runtime: bool = False) -> str:
        return json.dumps(self.as_dict(include_runtime), sort_keys=True, indent=2) + "\n"
