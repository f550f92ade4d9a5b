from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from mapcone import hakye
from mapcone.checks.check import Check, CheckResult
from mapcone.core import (
    DensityMatrix9,
    maximally_entangled,
    min_eigenvalue,
    random_matrix,
)
from mapcone.logging import get_logger
from mapcone.positivity import product_min, separable_sample, witness_apply

if TYPE_CHECKING:
    from mapcone.config import WitnessSanityCheckConfig

logger = get_logger(__name__)

_BLOCK_POSITIVITY_TOL = 1e-8
_EXACT_TOL = 1e-10


class WitnessSanityCheck(Check):
    """``Phi_t`` is positive but not completely positive, and detects the maximally entangled state.

    For every ``t`` in the grid:

    - the product-vector minimum of ``C_t`` is nonnegative;
    - the smallest eigenvalue of ``C_t`` is ``a_t - 2``;
    - no separable state is flagged for any ``B``;
    - the maximally entangled state gives ``(a_t - 2) / 3``.
    """

    def __init__(self, config: WitnessSanityCheckConfig) -> None:
        super().__init__(name="witness-sanity")
        self.config = config

    def run(self, seed: int) -> CheckResult:
        """Evaluate the witness on sampled states."""
        rng = np.random.default_rng(seed)
        states = [
            separable_sample(int(rng.integers(1, 10)), seed=int(rng.integers(2**32)))[1]
            for _ in range(self.config.separable_samples)
        ]
        b_matrices = [random_matrix(rng) for _ in range(self.config.random_b)]
        maxent = DensityMatrix9.from_matrix(maximally_entangled(normalized=True))

        min_product = np.inf
        eigen_error = 0.0
        maxent_error = 0.0
        min_separable = np.inf
        for t in self.config.t_grid:
            phi = hakye.hakye_map(t)
            a = hakye.coefficients(t).a
            verdict = product_min(phi.choi, restarts=self.config.restarts, seed=seed)
            min_product = min(min_product, verdict.min_value)
            eigen_error = max(eigen_error, abs(min_eigenvalue(phi.choi) - (a - 2.0)))
            maxent_error = max(
                maxent_error,
                abs(witness_apply(phi, np.eye(3), maxent) - (a - 2.0) / 3.0),
            )
            for rho in states:
                for b in b_matrices:
                    min_separable = min(min_separable, witness_apply(phi, b, rho))

        logger.debug("witness: product min %.3e, separable min %.3e", min_product, min_separable)
        passed = (
            min_product >= -_BLOCK_POSITIVITY_TOL
            and eigen_error <= _EXACT_TOL
            and maxent_error <= _EXACT_TOL
            and min_separable >= -self.config.tolerance
        )
        return self.result(
            passed=passed,
            min_product_value=float(min_product),
            max_eigenvalue_error=eigen_error,
            max_maxent_error=maxent_error,
            min_separable_witness=float(min_separable),
        )
