from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from mapcone.checks.check import Check, CheckResult
from mapcone.core import maximally_entangled, min_eigenvalue, partial_transpose
from mapcone.positivity import separable_sample

if TYPE_CHECKING:
    from mapcone.config import PptBaselineCheckConfig

_EXACT_TOL = 1e-10


class PptBaselineCheck(Check):
    """Separable samples are PPT; the maximally entangled state has partial-transpose minimum ``-1/3``."""

    def __init__(self, config: PptBaselineCheckConfig) -> None:
        super().__init__(name="ppt-baseline")
        self.config = config

    def run(self, seed: int) -> CheckResult:
        """Sample separable states and compare against the entangled reference."""
        rng = np.random.default_rng(seed)
        min_separable = min(
            min_eigenvalue(
                partial_transpose(
                    separable_sample(int(rng.integers(1, 10)), seed=int(rng.integers(2**32)))[1].matrix,
                ),
            )
            for _ in range(self.config.samples)
        )
        maxent = min_eigenvalue(partial_transpose(maximally_entangled(normalized=True)))
        return self.result(
            passed=min_separable >= -self.config.tolerance and abs(maxent + 1.0 / 3.0) <= _EXACT_TOL,
            min_separable_partial_transpose=min_separable,
            maxent_partial_transpose=maxent,
        )
