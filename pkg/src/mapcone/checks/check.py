from __future__ import annotations

from dataclasses import dataclass, field

Measurement = float | int | bool | str


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one verification check."""

    name: str
    passed: bool
    measurements: dict[str, Measurement] = field(default_factory=dict)
    detail: str = ""

    def to_json(self) -> dict[str, object]:
        """Serialize for reports."""
        return {
            "name": self.name,
            "passed": self.passed,
            "measurements": dict(self.measurements),
            "detail": self.detail,
        }


class Check:
    """Base class for checks in the verification suite."""

    def __init__(self, name: str) -> None:
        """Initialize the check."""
        self.name = name

    def run(self, seed: int) -> CheckResult:
        """Run the check with random streams derived from ``seed``."""
        raise NotImplementedError

    def result(self, *, passed: bool, detail: str = "", **measurements: Measurement) -> CheckResult:
        """Build a result carrying this check's name."""
        return CheckResult(self.name, passed, measurements, detail)
