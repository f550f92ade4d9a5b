from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from mapcone import hakye
from mapcone.checks.check import Check, CheckResult
from mapcone.core import compress_left, random_unit_vector
from mapcone.logging import get_logger

if TYPE_CHECKING:
    from mapcone.config import DeterminantCalculusCheckConfig

logger = get_logger(__name__)

_STEP = 1e-6


class DeterminantCalculusCheck(Check):
    """The compression determinant against the cubic in the squared moduli and its gradient.

    The determinant comes from the Choi matrix alone, so any error in the cubic's
    coefficients shows up as a disagreement.
    """

    def __init__(self, config: DeterminantCalculusCheckConfig) -> None:
        super().__init__(name="determinant-calculus")
        self.config = config

    def run(self, seed: int) -> CheckResult:
        """Compare on random ``(t, y)`` samples."""
        rng = np.random.default_rng(seed)
        det_error = 0.0
        compression_error = 0.0
        gradient_error = 0.0
        for _ in range(self.config.samples):
            t = float(rng.uniform(0.0, 1.0))
            y = random_unit_vector(rng)
            squared = np.abs(y) ** 2

            det_error = max(det_error, abs(hakye.F_det(t, y) - hakye.F_poly(t, *squared)))
            closed = hakye.compression(t, y)
            compression_error = max(
                compression_error,
                float(np.linalg.norm(closed - compress_left(hakye.choi_hakye(t), y))),
            )

            analytic = hakye.F_gradient(t, *squared)
            for i in range(3):
                forward, backward = squared.copy(), squared.copy()
                forward[i] += _STEP
                backward[i] -= _STEP
                numeric = (hakye.F_poly(t, *forward) - hakye.F_poly(t, *backward)) / (2 * _STEP)
                gradient_error = max(
                    gradient_error,
                    abs(numeric - analytic[i]) / max(1.0, abs(analytic[i])),
                )

        logger.debug("determinant error %.3e, gradient error %.3e", det_error, gradient_error)
        passed = (
            det_error <= self.config.tolerance
            and compression_error <= self.config.tolerance
            and gradient_error <= self.config.gradient_rtol
        )
        return self.result(
            passed=passed,
            samples=self.config.samples,
            max_determinant_error=det_error,
            max_compression_error=compression_error,
            max_gradient_error=gradient_error,
        )
