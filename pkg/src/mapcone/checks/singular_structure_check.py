from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from mapcone import hakye
from mapcone.checks.check import Check, CheckResult
from mapcone.core import numerical_rank, product_expectation
from mapcone.logging import get_logger

if TYPE_CHECKING:
    from mapcone.config import SingularStructureCheckConfig

logger = get_logger(__name__)

_DETERMINANT_TOL = 1e-10
_SINGULAR_RANK = 2


class SingularStructureCheck(Check):
    """Singular families, kernel vectors and completeness of the zero set."""

    def __init__(self, config: SingularStructureCheckConfig) -> None:
        super().__init__(name="singular-structure")
        self.config = config

    def run(self, seed: int) -> CheckResult:
        """Sweep phases on every family and a moduli grid for each ``t``."""
        rng = np.random.default_rng(seed)
        grid = hakye.moduli_grid(self.config.grid_steps)
        max_det = 0.0
        max_residual = 0.0
        max_pairing = 0.0
        rank_failures = 0
        stray_zeros = 0
        for t in self.config.t_grid:
            choi = hakye.choi_hakye(t)
            for family in hakye.singular_y_families(t):
                for _ in range(self.config.phase_draws):
                    phases = rng.uniform(0.0, 2.0 * np.pi, size=3)
                    y = family.vector(phases)
                    x = hakye.kernel_x(t, family, phases)
                    compression = hakye.compression(t, y)
                    max_det = max(max_det, abs(hakye.F_det(t, y)))
                    max_residual = max(max_residual, float(np.linalg.norm(compression @ x)))
                    max_pairing = max(max_pairing, abs(product_expectation(choi, y, x)))
                    if numerical_rank(compression) != _SINGULAR_RANK:
                        rank_failures += 1

            values = np.abs(hakye.F_poly(t, grid[:, 0], grid[:, 1], grid[:, 2]))
            near_zero = grid[values < self.config.zero_threshold]
            if near_zero.size:
                distances = hakye.distance_to_families(t, near_zero)
                stray_zeros += int(np.count_nonzero(distances > self.config.distance))

        logger.debug(
            "singular structure: det %.3e, kernel residual %.3e, %d stray zeros",
            max_det,
            max_residual,
            stray_zeros,
        )
        passed = (
            max_det <= _DETERMINANT_TOL
            and max_residual <= self.config.residual
            and max_pairing <= self.config.residual
            and rank_failures == 0
            and stray_zeros == 0
        )
        return self.result(
            passed=passed,
            grid_points=len(grid),
            max_determinant=max_det,
            max_kernel_residual=max_residual,
            max_zero_pairing=max_pairing,
            rank_failures=rank_failures,
            stray_zeros=stray_zeros,
        )
