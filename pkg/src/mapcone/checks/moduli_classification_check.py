from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from mapcone.checks.check import Check, CheckResult
from mapcone.core import random_matrix
from mapcone.localequiv import ModuliKind, classify_matrix, rows_moduli_equal_oracle

if TYPE_CHECKING:
    from mapcone.config import ModuliClassificationCheckConfig


def random_monomial(rng: np.random.Generator, *, unimodular: bool = False) -> np.ndarray:
    """Draw ``diag(zeta) P`` with a random permutation."""
    zeta = random_matrix(rng, (3,))
    if unimodular:
        zeta = zeta / np.abs(zeta)
    return np.diag(zeta) @ np.eye(3)[rng.permutation(3)]


def random_proportional_rows(rng: np.random.Generator) -> np.ndarray:
    """Draw a random matrix whose last row is a multiple of another row."""
    matrix = random_matrix(rng)
    matrix[2] = complex(*rng.standard_normal(2)) * matrix[int(rng.integers(2))]
    return matrix


class ModuliClassificationCheck(Check):
    """Row classification against the randomized modulus oracle on three matrix classes."""

    def __init__(self, config: ModuliClassificationCheckConfig) -> None:
        super().__init__(name="moduli-classification")
        self.config = config

    def run(self, seed: int) -> CheckResult:
        """Count disagreements between the structural and the sampled verdicts."""
        rng = np.random.default_rng(seed)
        samples = {
            ModuliKind.MONOMIAL: [
                random_monomial(rng, unimodular=bool(k % 2)) for k in range(self.config.per_class)
            ],
            ModuliKind.PROPORTIONAL_ROWS: [
                random_proportional_rows(rng) for _ in range(self.config.per_class)
            ],
            ModuliKind.GENERIC: [random_matrix(rng) for _ in range(self.config.per_class)],
        }
        misclassified = 0
        disagreements = 0
        for expected, matrices in samples.items():
            for matrix in matrices:
                result = classify_matrix(matrix)
                misclassified += result.kind is not expected
                oracle = rows_moduli_equal_oracle(matrix, self.config.phase_samples, seed)
                disagreements += oracle != result.rows_moduli_equal
                if result.kind is ModuliKind.GENERIC and oracle:
                    disagreements += 1
        return self.result(
            passed=misclassified == 0 and disagreements == 0,
            matrices=3 * self.config.per_class,
            misclassified=misclassified,
            disagreements=disagreements,
        )
