"""Verification suite running every check against one root seed."""

from __future__ import annotations

from typing import TYPE_CHECKING

from mapcone.checks import create_check
from mapcone.checks.check import CheckResult
from mapcone.logging import get_logger

if TYPE_CHECKING:
    from mapcone.checks import Check
    from mapcone.config import VerifyConfig


logger = get_logger(__name__)


class CheckExecutionError(Exception):
    """Raised when a check crashes instead of returning a result."""

    @classmethod
    def from_check(cls, check_name: str) -> CheckExecutionError:
        """Create error from specific check."""
        return cls(f"Error in {check_name} check")


class VerificationSuite:
    """Ordered collection of checks."""

    def __init__(self, checks: list[Check]) -> None:
        """Initialize the suite with a list of checks."""
        self.checks = checks

    @classmethod
    def from_config(cls, config: VerifyConfig) -> VerificationSuite:
        """Create a suite with one check per configuration section."""
        return cls([create_check(getattr(config, name)) for name in type(config).model_fields])

    def run(self, seed: int) -> list[CheckResult]:
        """Run every check; a crashing check is logged and recorded as failed."""
        results = []
        for check in self.checks:
            logger.info("Running %s check", check.name)
            try:
                result = check.run(seed)
            except Exception as e:  # noqa: BLE001
                error = CheckExecutionError.from_check(check.name)
                logger.exception("%s", error)
                result = CheckResult(check.name, passed=False, detail=f"{error}: {e}")
            logger.info("%s: %s", check.name, "pass" if result.passed else "FAIL")
            results.append(result)
        return results
