from __future__ import annotations

from functools import partial
from typing import TYPE_CHECKING

import numpy as np

from mapcone.checks.check import Check, CheckResult
from mapcone.core import (
    ComplexArray,
    LinearMapM3,
    choi_of_ad,
    choi_of_map,
    conjugation_map,
    dagger,
    hs_inner,
    hs_inner_maps,
    local_conjugate_choi,
    map_of_choi,
    random_matrix,
)
from mapcone.logging import get_logger

if TYPE_CHECKING:
    from mapcone.config import ChoiCalculusCheckConfig

logger = get_logger(__name__)


def _sandwich(left: ComplexArray, right: ComplexArray, x: ComplexArray) -> ComplexArray:
    return np.einsum("kab,bc,kcd->ad", left, x, right)


def random_map(rng: np.random.Generator, terms: int = 2) -> LinearMapM3:
    """Draw ``X -> sum_k A_k X B_k`` with Gaussian ``A_k, B_k``; not Hermiticity preserving."""
    left = random_matrix(rng, (terms, 3, 3))
    right = random_matrix(rng, (terms, 3, 3))
    return LinearMapM3.from_evaluator(partial(_sandwich, left, right))


def _relative(actual: ComplexArray | complex, expected: ComplexArray | complex) -> float:
    difference = float(np.linalg.norm(np.asarray(actual) - np.asarray(expected)))
    return difference / max(1.0, float(np.linalg.norm(np.asarray(expected))))


class ChoiCalculusCheck(Check):
    """Round trip, isometry, adjoint and transport identities of the Choi calculus."""

    def __init__(self, config: ChoiCalculusCheckConfig) -> None:
        super().__init__(name="choi-calculus")
        self.config = config

    def run(self, seed: int) -> CheckResult:
        """Evaluate every identity on fresh random instances and report the worst error."""
        rng = np.random.default_rng(seed)
        errors = dict.fromkeys(
            ("round_trip", "isometry", "adjoint", "quadruple_adjoint", "ad_adjoint", "transport"), 0.0
        )
        for _ in range(self.config.instances):
            phi, psi, sigma, theta = (random_map(rng) for _ in range(4))
            a, b = random_matrix(rng), random_matrix(rng)
            choi = random_matrix(rng, (9, 9))

            round_trip = choi_of_map(map_of_choi(choi))
            isometry = (hs_inner_maps(phi, psi), hs_inner(phi.choi, psi.choi))
            adjoint = (
                hs_inner_maps(phi.compose(sigma), psi),
                hs_inner_maps(sigma, phi.adjoint().compose(psi)),
            )
            quadruple = (
                hs_inner_maps(theta.compose(phi).compose(sigma), psi),
                hs_inner_maps(phi, theta.adjoint().compose(psi).compose(sigma.adjoint())),
            )
            transported = conjugation_map(a).compose(phi).compose(conjugation_map(b))

            updates = {
                "round_trip": _relative(round_trip, choi),
                "isometry": _relative(*isometry),
                "adjoint": _relative(*adjoint),
                "quadruple_adjoint": _relative(*quadruple),
                "ad_adjoint": _relative(conjugation_map(a).adjoint().choi, choi_of_ad(dagger(a))),
                "transport": _relative(transported.choi, local_conjugate_choi(phi.choi, a, b)),
            }
            for key, value in updates.items():
                errors[key] = max(errors[key], value)

        worst = max(errors.values())
        logger.debug("choi calculus worst relative error %.3e", worst)
        return self.result(
            passed=worst <= self.config.tolerance,
            instances=self.config.instances,
            **{f"max_error_{key}": value for key, value in errors.items()},
        )
