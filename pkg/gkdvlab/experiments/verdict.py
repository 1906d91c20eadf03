"""Verdict models and the experiment exception hierarchy"""
from typing import Any, Dict, List

from pydantic import BaseModel, ConfigDict, Field

class ExperimentError(RuntimeError):
    """Base exception for ensemble and study errors"""
    pass

class InsufficientHorizonsError(ExperimentError, ValueError):
    """Raised when a scaling study gets fewer than four increasing horizons"""
    pass

class Verdict(BaseModel):
    """One PASS/FAIL comparison of a Monte Carlo estimate against its target.

    Serialized with the keys check, target, estimate, se, bias_estimate, pass.
    """
    model_config = ConfigDict(populate_by_name=True)

    check: str
    target: float
    estimate: float
    se: float
    bias_estimate: float = 0.0
    passed: bool = Field(alias="pass")
    details: Dict[str, Any] = Field(default_factory=dict)

    def to_report(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)

class CheckReport(BaseModel):
    """Several verdicts produced by one check"""
    check: str
    verdicts: List[Verdict]
    details: Dict[str, Any] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_report(self) -> Dict[str, Any]:
        return {
            "check": self.check,
            "pass": self.passed,
            "verdicts": [v.to_report() for v in self.verdicts],
            "details": self.details,
        }

SE_BAND = 3.0

def within_band(estimate: float, target: float, se: float, bias: float = 0.0) -> bool:
    """|estimate - target| <= 3 SE + |bias|, with a rounding floor for exact zero-variance cases."""
    slack = 1e-12 * max(1.0, abs(target))
    return bool(abs(estimate - target) <= SE_BAND * se + abs(bias) + slack)
