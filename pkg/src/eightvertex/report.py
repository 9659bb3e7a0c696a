"""Check reports: named residuals with pass/fail verdicts.

A report serializes to a single JSON document and round-trips losslessly.
Complex parameters are stored as [re, im] pairs; non-finite residuals
(recorded evaluation failures) are stored as strings.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence


def encode_value(value: Any) -> Any:
    """JSON-safe encoding for scalars appearing in reports."""
    if isinstance(value, complex):
        return {"re": encode_value(value.real), "im": encode_value(value.imag)}
    if isinstance(value, float):
        if math.isfinite(value):
            return value
        return repr(value)  # "inf", "-inf", "nan"
    if isinstance(value, (list, tuple)):
        return [encode_value(v) for v in value]
    if isinstance(value, dict):
        return {k: encode_value(v) for k, v in value.items()}
    return value


def decode_value(value: Any) -> Any:
    if isinstance(value, dict):
        if set(value.keys()) == {"re", "im"}:
            return complex(decode_value(value["re"]), decode_value(value["im"]))
        return {k: decode_value(v) for k, v in value.items()}
    if isinstance(value, list):
        return [decode_value(v) for v in value]
    if isinstance(value, str) and value in ("inf", "-inf", "nan"):
        return float(value)
    return value


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one named residual check."""

    name: str
    samples: int
    max_residual: float
    tolerance: float
    passed: bool
    error: Optional[str] = None

    def to_dict(self) -> dict:
        data = {
            "name": self.name,
            "samples": self.samples,
            "max_residual": encode_value(float(self.max_residual)),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
        }
        if self.error is not None:
            data["error"] = self.error
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CheckResult":
        return cls(
            name=data["name"],
            samples=int(data["samples"]),
            max_residual=float(decode_value(data["max_residual"])),
            tolerance=float(data["tolerance"]),
            passed=bool(data["pass"]),
            error=data.get("error"),
        )


def make_check(
    name: str,
    residuals: Sequence[float],
    tolerance: float,
    error: Optional[str] = None,
) -> CheckResult:
    """Assemble a CheckResult; an error or empty residual list fails."""
    if error is not None or len(residuals) == 0:
        return CheckResult(
            name=name,
            samples=len(residuals),
            max_residual=math.inf,
            tolerance=tolerance,
            passed=False,
            error=error or "no samples evaluated",
        )
    worst = max(float(r) for r in residuals)
    return CheckResult(
        name=name,
        samples=len(residuals),
        max_residual=worst,
        tolerance=tolerance,
        passed=worst < tolerance,
    )


@dataclass
class CheckReport:
    """Named residual suite with the parameters that produced it."""

    suite: str
    checks: list[CheckResult] = field(default_factory=list)
    params_echo: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def extend(self, other: "CheckReport") -> None:
        self.checks.extend(other.checks)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "checks": [c.to_dict() for c in self.checks],
            "params_echo": encode_value(self.params_echo),
            "seed": self.seed,
            "all_passed": self.all_passed,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CheckReport":
        return cls(
            suite=data["suite"],
            checks=[CheckResult.from_dict(c) for c in data["checks"]],
            params_echo=decode_value(data["params_echo"]),
            seed=int(data["seed"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "CheckReport":
        return cls.from_dict(json.loads(text))
