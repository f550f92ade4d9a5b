from __future__ import annotations

import itertools
from typing import TYPE_CHECKING

import numpy as np

from mapcone import hakye
from mapcone.checks.check import Check, CheckResult
from mapcone.localequiv import (
    Status,
    decide_local_equivalence,
    numeric_search_equiv,
    planted_equivalence,
)
from mapcone.logging import get_logger

if TYPE_CHECKING:
    from mapcone.config import LocalInequivalenceCheckConfig

logger = get_logger(__name__)

_EQUIVALENT_RESIDUAL = 1e-8


class LocalInequivalenceCheck(Check):
    """Certificates for every parameter pair, corroborated by the numerical search."""

    def __init__(self, config: LocalInequivalenceCheckConfig) -> None:
        super().__init__(name="local-inequivalence")
        self.config = config

    def run(self, seed: int) -> CheckResult:
        """Decide all pairs, then run the search on planted and unequal instances."""
        failures: list[str] = []
        for t1, t2 in itertools.product(self.config.t_values, repeat=2):
            verdict = decide_local_equivalence(t1, t2, seed=seed)
            if t1 == t2:
                if not verdict.equivalent or (verdict.numeric_residual or 0.0) >= _EQUIVALENT_RESIDUAL:
                    failures.append(f"({t1}, {t2}) not equivalent")
                continue
            chains = [r for r in verdict.certificate if r.permutation is not None]
            if (
                verdict.equivalent
                or not verdict.certified
                or len(chains) != 6  # noqa: PLR2004
                or any(r.status is not Status.CONTRADICTION for r in chains)
            ):
                failures.append(f"({t1}, {t2}) certificate incomplete")

        planted_worst = 0.0
        for offset, t in enumerate(self.config.t_values):
            _, _, transformed = planted_equivalence(hakye.choi_hakye(t), seed=seed + offset)
            search = numeric_search_equiv(
                transformed,
                hakye.choi_hakye(t),
                restarts=self.config.restarts,
                iters=self.config.iters,
                seed=seed,
            )
            planted_worst = max(planted_worst, search.residual)

        unequal_best = np.inf
        for t1, t2 in self.config.numeric_pairs:
            search = numeric_search_equiv(
                hakye.choi_hakye(t1),
                hakye.choi_hakye(t2),
                restarts=self.config.restarts,
                iters=self.config.iters,
                seed=seed,
            )
            unequal_best = min(unequal_best, search.residual)

        logger.debug("planted residual %.3e, unequal residual %.3e", planted_worst, unequal_best)
        passed = (
            not failures
            and planted_worst < self.config.planted_residual
            and unequal_best > self.config.inequivalent_floor
        )
        return self.result(
            passed=passed,
            detail="; ".join(failures),
            pairs=len(self.config.t_values) ** 2,
            max_planted_residual=planted_worst,
            min_unequal_residual=float(unequal_best),
        )
