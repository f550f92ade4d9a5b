"""Positivity tests for linear maps on M3 and the witness pairing with density matrices.

A map is positive (block-positive Choi matrix) when ``<x (x) y|C|x (x) y> >= 0`` for
all unit vectors. The minimum over product vectors is searched by alternating
minimal eigenvectors: with ``y`` fixed the minimum over ``x`` is the smallest
eigenvalue of the second-factor compression, and vice versa. Each step can only
lower the value, so every start descends monotonically; independent starts are
seeded from one :class:`numpy.random.SeedSequence` and merged deterministically.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy import optimize

from mapcone.core import (
    DIM,
    DIM2,
    ComplexArray,
    DensityMatrix9,
    DomainError,
    LinearMapM3,
    as_matrix,
    choi_of_ad,
    compose_choi,
    compress_left,
    compress_right,
    conjugation_map,
    dagger,
    hs_inner,
    min_eigenpair,
    min_eigenvalue,
    partial_transpose,
    product_expectation,
    random_matrix,
    random_unit_vector,
    require_hermitian,
    unvectorize,
)
from mapcone.logging import get_logger

if TYPE_CHECKING:
    from collections.abc import Callable

    import numpy.typing as npt

logger = get_logger(__name__)

_UNIT_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class ProductVector:
    """A pair of unit vectors ``(x, y)`` standing for ``x (x) y``."""

    x: ComplexArray
    y: ComplexArray

    def __post_init__(self) -> None:
        for name in ("x", "y"):
            vector = np.asarray(getattr(self, name), dtype=np.complex128).reshape(-1)
            if vector.shape != (DIM,):
                raise DomainError.wrong_shape(name, vector.shape, (DIM,))
            if abs(np.linalg.norm(vector) - 1.0) > _UNIT_ATOL:
                raise DomainError(f"{name} is not a unit vector")
            vector.flags.writeable = False
            object.__setattr__(self, name, vector)

    @property
    def vector(self) -> ComplexArray:
        """Return ``x (x) y`` as a 9-vector."""
        return np.kron(self.x, self.y)


@dataclass(frozen=True)
class Descent:
    """Trajectory of one alternating-eigenvector descent."""

    value: float
    argmin: ProductVector
    values: tuple[float, ...]
    converged: bool


@dataclass(frozen=True)
class PositivityVerdict:
    """Result of the product-vector minimization of a Choi matrix."""

    min_value: float
    argmin: ProductVector
    restarts_used: int
    converged: bool

    def to_json(self) -> dict[str, object]:
        """Serialize for reports."""
        return {
            "min_value": self.min_value,
            "argmin": {
                "x": _complex_list(self.argmin.x),
                "y": _complex_list(self.argmin.y),
            },
            "restarts_used": self.restarts_used,
            "converged": self.converged,
        }


def _complex_list(vector: ComplexArray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(vector).reshape(-1)]


def alternating_descent(
    choi: npt.ArrayLike,
    y0: npt.ArrayLike,
    *,
    max_iters: int = 200,
    tol: float = 1e-12,
) -> Descent:
    """Run one descent from the starting vector ``y0`` of the second factor.

    Every sweep value is recorded as computed; the descent stops when an x-then-y
    sweep lowers the value by less than ``tol``.
    """
    matrix = require_hermitian(as_matrix(choi, (DIM2, DIM2), "C"), "C")
    y = np.asarray(y0, dtype=np.complex128) / np.linalg.norm(y0)
    values: list[float] = []
    x = y
    converged = False
    for _ in range(max_iters):
        _, x = min_eigenpair(compress_right(matrix, y))
        value, y = min_eigenpair(compress_left(matrix, x))
        improvement = values[-1] - value if values else math.inf
        values.append(value)
        if improvement < tol:
            converged = True
            break
    argmin = ProductVector(x / np.linalg.norm(x), y / np.linalg.norm(y))
    return Descent(
        value=product_expectation(matrix, argmin.x, argmin.y),
        argmin=argmin,
        values=tuple(values),
        converged=converged,
    )


def product_min(
    choi: npt.ArrayLike,
    *,
    restarts: int = 64,
    max_iters: int = 200,
    tol: float = 1e-12,
    seed: int = 0,
    workers: int = 1,
) -> PositivityVerdict:
    """Minimize ``<x (x) y|C|x (x) y>`` over unit product vectors.

    Parameters
    ----------
    choi : array_like
        Hermitian 9x9 matrix.
    restarts : int, default=64
        Number of independent random starts.
    max_iters : int, default=200
        Sweep limit per start.
    tol : float, default=1e-12
        Improvement below which a start counts as converged.
    seed : int, default=0
        Root seed; the per-start streams are spawned from it.
    workers : int, default=1
        Thread count. The result does not depend on it.

    Returns
    -------
    PositivityVerdict
        The smallest value found; ties resolve to the lowest start index.

    Raises
    ------
    DomainError
        If ``choi`` is not Hermitian or ``restarts`` is not positive.

    """
    if restarts < 1:
        raise DomainError.out_of_range("restarts", restarts, "[1, inf)")
    matrix = require_hermitian(as_matrix(choi, (DIM2, DIM2), "C"), "C")
    starts = [
        random_unit_vector(np.random.default_rng(child))
        for child in np.random.SeedSequence(seed).spawn(restarts)
    ]

    def descend(y0: ComplexArray) -> Descent:
        return alternating_descent(matrix, y0, max_iters=max_iters, tol=tol)

    descents = _map_starts(descend, starts, workers)
    index, best = min(enumerate(descents), key=lambda item: (item[1].value, item[0]))
    logger.debug("product minimum %.3e reached from start %d", best.value, index)
    return PositivityVerdict(
        min_value=best.value,
        argmin=best.argmin,
        restarts_used=restarts,
        converged=best.converged,
    )


def _map_starts[T, R](function: Callable[[T], R], starts: list[T], workers: int) -> list[R]:
    if workers <= 1:
        return [function(start) for start in starts]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(function, starts))


def is_block_positive(choi: npt.ArrayLike, tol: float = 1e-8, **search: int) -> bool:
    """Return whether the product-vector minimum is at least ``-tol``.

    ``search`` is forwarded to :func:`product_min`.
    """
    return product_min(choi, **search).min_value >= -tol


def is_completely_positive(choi: npt.ArrayLike, tol: float = 1e-9) -> bool:
    """Return whether the Choi matrix is positive semidefinite up to ``tol``."""
    return min_eigenvalue(choi) >= -tol


def _density(rho: DensityMatrix9 | npt.ArrayLike) -> ComplexArray:
    if isinstance(rho, DensityMatrix9):
        return rho.matrix
    return DensityMatrix9.from_matrix(rho).matrix


def is_ppt(rho: DensityMatrix9 | npt.ArrayLike, tol: float = 1e-9) -> bool:
    """Return whether the partial transpose of ``rho`` is positive semidefinite up to ``tol``."""
    return min_eigenvalue(partial_transpose(_density(rho))) >= -tol


def witness_output(phi: LinearMapM3, b: npt.ArrayLike, rho: DensityMatrix9 | npt.ArrayLike) -> ComplexArray:
    """Return ``(I (x) Phi)(Ad_{I (x) B} rho)``."""
    local = np.kron(np.eye(DIM), as_matrix(b, (DIM, DIM), "B"))
    conjugated = local @ _density(rho) @ dagger(local)
    return compose_choi(phi, conjugated)


def witness_apply(phi: LinearMapM3, b: npt.ArrayLike, rho: DensityMatrix9 | npt.ArrayLike) -> float:
    """Return the smallest eigenvalue of ``(I (x) Phi)(Ad_{I (x) B} rho)``.

    Nonnegative for every separable ``rho`` when ``phi`` is positive; a negative
    value shows that ``rho`` is entangled.

    Raises
    ------
    DomainError
        If ``phi`` does not preserve Hermiticity.

    """
    if not phi.is_hermiticity_preserving():
        raise DomainError("witness map must preserve Hermiticity")
    return min_eigenvalue(witness_output(phi, b, rho))


def pairing(psi: LinearMapM3, phi: LinearMapM3) -> float:
    """Return the real bilinear pairing ``<Psi, Phi>'' = Tr(C_Psi C_Phi*)``.

    Both Choi matrices are Hermitian here, so the trace is real.

    Raises
    ------
    DomainError
        If either map does not preserve Hermiticity.

    """
    for name, map_ in (("Psi", psi), ("Phi", phi)):
        if not map_.is_hermiticity_preserving():
            raise DomainError(f"{name} must preserve Hermiticity")
    return float(np.real(hs_inner(psi.choi, phi.choi)))


@dataclass(frozen=True)
class PairingCriterion:
    """Comparison of the witness eigenvalue with pairings against conjugation maps.

    ``min_pairing`` is the smallest ``<Ad_{B*} o Phi* o Ad_A, Psi>''`` over the
    sampled unit ``A``; the directions include the eigenvectors of the witness output, so
    the two numbers coincide up to rounding.
    """

    witness_value: float
    min_pairing: float
    directions: int
    agree: bool


def pairing_criterion(
    phi: LinearMapM3,
    b: npt.ArrayLike,
    rho: DensityMatrix9 | npt.ArrayLike,
    *,
    samples: int = 64,
    seed: int = 0,
    tol: float = 1e-9,
) -> PairingCriterion:
    """Evaluate the entanglement criterion in its pairing form.

    ``rho`` is read as the Choi matrix of a map ``Psi``; the pairing of
    ``Ad_{B*} o Phi* o Ad_A`` with ``Psi`` equals ``<alpha|W|alpha>`` for the witness
    output ``W`` and ``alpha`` the vectorization of ``A``.
    """
    matrix = _density(rho)
    b_matrix = as_matrix(b, (DIM, DIM), "B")
    output = witness_output(phi, b_matrix, matrix)
    witness_value = min_eigenvalue(output)

    outer = conjugation_map(dagger(b_matrix)).compose(phi.adjoint())
    _, eigenvectors = np.linalg.eigh((output + dagger(output)) / 2)
    rng = np.random.default_rng(seed)
    directions = [unvectorize(eigenvectors[:, k]) for k in range(DIM2)]
    directions += [random_matrix(rng) for _ in range(samples)]

    values = []
    for a in directions:
        a_unit = a / np.linalg.norm(a)
        composed = compose_choi(outer, choi_of_ad(a_unit))
        values.append(float(np.real(hs_inner(matrix, composed))))
    min_pairing = min(values)
    return PairingCriterion(
        witness_value=witness_value,
        min_pairing=min_pairing,
        directions=len(directions),
        agree=(witness_value >= -tol) == (min_pairing >= -tol),
    )


@dataclass(frozen=True, eq=False)
class SeparableSpec:
    """Convex combination of product states ``sum_k w_k |x_k><x_k| (x) |y_k><y_k|``."""

    weights: tuple[float, ...]
    factors: tuple[ProductVector, ...] = field(repr=False)

    def assemble(self) -> ComplexArray:
        """Return the 9x9 density matrix."""
        rho = np.zeros((DIM2, DIM2), dtype=np.complex128)
        for weight, factor in zip(self.weights, self.factors, strict=True):
            vector = factor.vector
            rho += weight * np.outer(vector, vector.conj())
        return rho


def separable_sample(k: int, seed: int = 0) -> tuple[SeparableSpec, DensityMatrix9]:
    """Draw a separable density matrix with ``k`` product terms and Dirichlet weights."""
    if k < 1:
        raise DomainError.out_of_range("k", k, "[1, inf)")
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(k))
    factors = tuple(
        ProductVector(random_unit_vector(rng), random_unit_vector(rng)) for _ in range(k)
    )
    spec = SeparableSpec(tuple(float(w) for w in weights), factors)
    return spec, DensityMatrix9.from_matrix(spec.assemble())


def _sum_of_conjugations(matrices: tuple[ComplexArray, ...], x: ComplexArray) -> ComplexArray:
    return sum((a @ x @ dagger(a) for a in matrices), np.zeros((DIM, DIM), np.complex128))


def superpositive_sample(n: int, seed: int = 0) -> LinearMapM3:
    """Draw ``sum_i Ad_{A_i}`` with ``n`` random rank-one ``A_i``.

    Such maps are superpositive: their Choi matrices are separable.
    """
    if n < 1:
        raise DomainError.out_of_range("n", n, "[1, inf)")
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(n))
    matrices = tuple(
        np.sqrt(w) * np.outer(random_unit_vector(rng), random_unit_vector(rng).conj())
        for w in weights
    )
    choi = sum((choi_of_ad(a) for a in matrices), np.zeros((DIM2, DIM2), np.complex128))

    def evaluate(x: ComplexArray) -> ComplexArray:
        return _sum_of_conjugations(matrices, x)

    return LinearMapM3(choi, evaluate)


def is_separable_choi_sample(phi: LinearMapM3, tol: float = 1e-9) -> bool:
    """Check the necessary conditions for a separable Choi matrix: PSD and PPT after normalization."""
    trace = float(np.real(np.trace(phi.choi)))
    if trace <= 0:
        return False
    return is_completely_positive(phi.choi, tol) and is_ppt(phi.choi / trace, tol)


@dataclass(frozen=True)
class RankProfile:
    """Smallest second singular value found for the compressions on each side.

    A value near zero means some compression drops to rank at most one.
    """

    second_factor: float
    first_factor: float

    def to_json(self) -> dict[str, float]:
        """Serialize for reports."""
        return {"second_factor": self.second_factor, "first_factor": self.first_factor}


def _second_singular_value(
    compress: Callable[[ComplexArray, ComplexArray], ComplexArray],
    choi: ComplexArray,
    vector: ComplexArray,
) -> float:
    return float(np.linalg.svd(compress(choi, vector), compute_uv=False)[1])


def _from_real(params: np.ndarray) -> ComplexArray:
    vector = params[:DIM] + 1j * params[DIM:]
    norm = np.linalg.norm(vector)
    return vector / norm if norm > 0 else np.ones(DIM, np.complex128) / np.sqrt(DIM)


def _min_second_singular_value(
    compress: Callable[[ComplexArray, ComplexArray], ComplexArray],
    choi: ComplexArray,
    rng: np.random.Generator,
    samples: int,
    refinements: int,
) -> float:
    candidates = [random_unit_vector(rng) for _ in range(samples)]
    scored = sorted(
        ((_second_singular_value(compress, choi, v), k) for k, v in enumerate(candidates)),
    )
    best = scored[0][0]
    for _, k in scored[:refinements]:
        start = np.concatenate([candidates[k].real, candidates[k].imag])
        result = optimize.minimize(
            lambda p: _second_singular_value(compress, choi, _from_real(p)),
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000},
        )
        best = min(best, float(result.fun))
    return best


def compression_rank_profile(
    choi: npt.ArrayLike,
    *,
    samples: int = 64,
    refinements: int = 4,
    seed: int = 0,
) -> RankProfile:
    """Search for compressions of rank at most one on both sides.

    Random unit vectors are scored by the second singular value of the compression
    and the best ``refinements`` of them are polished with Nelder-Mead.
    """
    matrix = as_matrix(choi, (DIM2, DIM2), "C")
    rng = np.random.default_rng(seed)
    return RankProfile(
        second_factor=_min_second_singular_value(compress_right, matrix, rng, samples, refinements),
        first_factor=_min_second_singular_value(compress_left, matrix, rng, samples, refinements),
    )
