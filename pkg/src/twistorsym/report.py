"""Residual records shared by the verification routines and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np


@dataclass
class CheckRecord:
    name: str
    anchor: str
    max_residual: float
    mean_residual: float
    samples: int
    passed: bool
    errors: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def num(v):
            v = float(v)
            return v if math.isfinite(v) else repr(v)

        return {
            "name": self.name,
            "anchor": self.anchor,
            "max_residual": num(self.max_residual),
            "mean_residual": num(self.mean_residual),
            "samples": int(self.samples),
            "passed": bool(self.passed),
            "errors": list(self.errors),
        }


def record(name: str, anchor: str, residuals, tol: float, errors=None, below: bool = True) -> CheckRecord:
    """Aggregate residuals by max and mean.

    ``below=True`` passes when every residual is under ``tol``; ``below=False``
    is for detection checks, which pass when the largest residual exceeds it.
    """
    errors = list(errors or [])
    res = np.asarray([float(r) for r in residuals], float)
    if res.size == 0:
        mx = mean = float("nan")
        ok = False
    else:
        mx = float(np.max(res))
        mean = float(np.mean(res))
        ok = bool(mx < tol) if below else bool(mx > tol)
    return CheckRecord(name, anchor, mx, mean, int(res.size), ok and not errors, errors)


@dataclass
class Report:
    records: list

    @property
    def passed(self) -> bool:
        return all(r.passed and not r.errors for r in self.records)

    def by_name(self, name: str) -> CheckRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)
