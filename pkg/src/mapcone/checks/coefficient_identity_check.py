from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from mapcone import hakye
from mapcone.checks.check import Check, CheckResult

if TYPE_CHECKING:
    from mapcone.config import CoefficientIdentityCheckConfig


class CoefficientIdentityCheck(Check):
    """Identities between ``a_t, b_t, c_t`` and the cubic coefficients over a parameter grid.

    - ``a + b + c = 2``
    - ``3A + B + C`` equals ``(1 - t)^3 / (1 - t + t^2)^2``
    - ``3A + B + C = -(2B + 2C + D)``, so the gradient vanishes at equal moduli
    """

    def __init__(self, config: CoefficientIdentityCheckConfig) -> None:
        super().__init__(name="coefficient-identity")
        self.config = config

    def run(self, seed: int) -> CheckResult:  # noqa: ARG002
        """Evaluate the identities at every grid point."""
        third = 1.0 / 3.0
        worst = {"sum": 0.0, "closed_form": 0.0, "balance": 0.0, "stationarity": 0.0}
        for t in self.config.t_grid:
            p = hakye.coefficients(t)
            k = hakye.F_constants(t)
            gradient = hakye.F_gradient(t, third, third, third)
            worst["sum"] = max(worst["sum"], abs(p.a + p.b + p.c - 2.0))
            worst["closed_form"] = max(
                worst["closed_form"],
                abs(k.diagonal_sum - hakye.diagonal_sum_closed_form(t)),
            )
            worst["balance"] = max(worst["balance"], abs(k.diagonal_sum + k.cross_sum))
            worst["stationarity"] = max(worst["stationarity"], float(np.max(np.abs(gradient))))
        return self.result(
            passed=max(worst.values()) <= self.config.tolerance,
            grid_points=len(self.config.t_grid),
            **{f"max_error_{key}": value for key, value in worst.items()},
        )
