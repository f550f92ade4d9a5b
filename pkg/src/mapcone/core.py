"""Dense complex linear algebra on 3x3 and 9x9 matrices and the Choi calculus.

A 9x9 matrix acts on C^3 (x) C^3 with the composite index convention
``(i, k) -> 3 * i + k``, ``i`` belonging to the first tensor factor. A Choi matrix thus
satisfies ``C[(i, k), (j, l)] = Phi(e_ij)[k, l]`` and reshapes to ``C4[i, k, j, l]``.
Choi matrices carry no normalization; density matrices are normalized separately.

All values are plain numpy arrays or frozen containers holding read-only arrays, so
every function here is safe to call from several threads at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import TYPE_CHECKING

import numpy as np
import numpy.typing as npt

from mapcone.logging import get_logger

if TYPE_CHECKING:
    from collections.abc import Callable

logger = get_logger(__name__)

type ComplexArray = npt.NDArray[np.complex128]
type RealArray = npt.NDArray[np.float64]
type MatrixEvaluator = Callable[[ComplexArray], ComplexArray]

DIM = 3
DIM2 = DIM * DIM
HERMITIAN_RTOL = 1e-10
RANK_RTOL = 1e-9
_LINEARITY_RTOL = 1e-9


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""

    @classmethod
    def wrong_shape(
        cls, name: str, shape: tuple[int, ...], expected: tuple[int, ...]
    ) -> DomainError:
        """Create error for an array of unexpected shape."""
        return cls(f"{name} must have shape {expected}, got {shape}")

    @classmethod
    def non_finite(cls, name: str) -> DomainError:
        """Create error for NaN or infinite entries."""
        return cls(f"{name} contains NaN or infinite entries")

    @classmethod
    def not_hermitian(cls, name: str, deviation: float) -> DomainError:
        """Create error for a matrix that should be Hermitian but is not."""
        return cls(f"{name} is not Hermitian (|M - M*|_F = {deviation:.3e})")

    @classmethod
    def out_of_range(cls, name: str, value: float, interval: str) -> DomainError:
        """Create error for a scalar parameter outside its interval."""
        return cls(f"{name} = {value!r} is outside {interval}")

    @classmethod
    def singular(cls, name: str) -> DomainError:
        """Create error for a matrix that must be invertible."""
        return cls(f"{name} is singular")

    @classmethod
    def not_density_matrix(cls, reason: str) -> DomainError:
        """Create error for a matrix that fails density matrix validation."""
        return cls(f"not a density matrix: {reason}")


class InvalidMapError(DomainError):
    """Raised when a map evaluator does not describe a linear map on M3."""

    @classmethod
    def non_finite_output(cls) -> InvalidMapError:
        """Create error for an evaluator producing NaN or infinite entries."""
        return cls("map evaluator produced NaN or infinite entries")

    @classmethod
    def not_linear(cls, deviation: float) -> InvalidMapError:
        """Create error for an evaluator failing the linearity spot test."""
        return cls(f"map evaluator is not linear (deviation {deviation:.3e})")


def as_matrix(value: npt.ArrayLike, shape: tuple[int, int], name: str = "matrix") -> ComplexArray:
    """Convert to a complex array of the given shape, rejecting non-finite entries."""
    array = np.asarray(value, dtype=np.complex128)
    if array.shape != shape:
        raise DomainError.wrong_shape(name, array.shape, shape)
    if not np.all(np.isfinite(array)):
        raise DomainError.non_finite(name)
    return array


def as_vector(
    value: npt.ArrayLike, name: str = "vector", *, normalize: bool = False
) -> ComplexArray:
    """Convert to a complex 3-vector, optionally scaled to unit norm."""
    vector = np.asarray(value, dtype=np.complex128).reshape(-1)
    if vector.shape != (DIM,):
        raise DomainError.wrong_shape(name, vector.shape, (DIM,))
    if not np.all(np.isfinite(vector)):
        raise DomainError.non_finite(name)
    if normalize:
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise DomainError(f"{name} is the zero vector and cannot be normalized")
        vector = vector / norm
    return vector


def freeze(array: npt.ArrayLike) -> ComplexArray:
    """Return a read-only complex copy of the array."""
    frozen = np.array(array, dtype=np.complex128, copy=True)
    frozen.flags.writeable = False
    return frozen


def dagger(matrix: ComplexArray) -> ComplexArray:
    """Return the conjugate transpose."""
    return matrix.conj().T


def hermitian_deviation(matrix: ComplexArray) -> float:
    """Return the Frobenius norm of ``M - M*``."""
    return float(np.linalg.norm(matrix - dagger(matrix)))


def is_hermitian(matrix: npt.ArrayLike, rtol: float = HERMITIAN_RTOL) -> bool:
    """Check ``M = M*`` within ``rtol * |M|_F``."""
    array = np.asarray(matrix, dtype=np.complex128)
    return hermitian_deviation(array) <= rtol * float(np.linalg.norm(array))


def require_hermitian(
    matrix: npt.ArrayLike, name: str = "matrix", rtol: float = HERMITIAN_RTOL
) -> ComplexArray:
    """Return the Hermitian part of the matrix, or raise if it is not Hermitian."""
    array = np.asarray(matrix, dtype=np.complex128)
    if not np.all(np.isfinite(array)):
        raise DomainError.non_finite(name)
    deviation = hermitian_deviation(array)
    if deviation > rtol * float(np.linalg.norm(array)):
        raise DomainError.not_hermitian(name, deviation)
    return (array + dagger(array)) / 2


def matrix_unit(i: int, j: int) -> ComplexArray:
    """Return the matrix unit ``e_ij`` of M3."""
    unit = np.zeros((DIM, DIM), dtype=np.complex128)
    unit[i, j] = 1.0
    return unit


def as_tensor(choi: ComplexArray) -> ComplexArray:
    """View a 9x9 matrix as the 4-index tensor ``C4[i, k, j, l]``."""
    return choi.reshape(DIM, DIM, DIM, DIM)


def apply_choi(choi: ComplexArray, x: ComplexArray) -> ComplexArray:
    """Evaluate the map encoded by a Choi matrix: ``Phi(X)_kl = sum X_ij C[(i,k),(j,l)]``."""
    return np.einsum("ij,ikjl->kl", x, as_tensor(choi))


def choi_of_map(evaluator: MatrixEvaluator, *, check_linearity: bool = True) -> ComplexArray:
    """Return the Choi matrix ``sum_ij e_ij (x) Phi(e_ij)`` of a map given by its evaluator.

    Parameters
    ----------
    evaluator : Callable[[ComplexArray], ComplexArray]
        Function computing ``Phi(X)`` for a 3x3 complex matrix ``X``.
    check_linearity : bool, default=True
        Compare the evaluator on fixed random inputs against the linear extension of
        its values on matrix units.

    Returns
    -------
    ComplexArray
        The 9x9 Choi matrix.

    Raises
    ------
    InvalidMapError
        If the evaluator produces non-finite entries or fails the linearity test.

    """
    blocks = np.empty((DIM, DIM, DIM, DIM), dtype=np.complex128)
    for i in range(DIM):
        for j in range(DIM):
            blocks[i, j] = evaluator(matrix_unit(i, j))
    if not np.all(np.isfinite(blocks)):
        raise InvalidMapError.non_finite_output()
    choi = blocks.transpose(0, 2, 1, 3).reshape(DIM2, DIM2)

    if check_linearity:
        # fixed stream so the check itself is deterministic
        rng = np.random.default_rng(20111)
        for _ in range(2):
            sample = random_matrix(rng)
            expected = apply_choi(choi, sample)
            actual = np.asarray(evaluator(sample), dtype=np.complex128)
            if not np.all(np.isfinite(actual)):
                raise InvalidMapError.non_finite_output()
            deviation = float(np.linalg.norm(actual - expected))
            scale = max(1.0, float(np.linalg.norm(expected)))
            if deviation > _LINEARITY_RTOL * scale:
                raise InvalidMapError.not_linear(deviation)
    return choi


@dataclass(frozen=True, eq=False)
class LinearMapM3:
    """A linear map M3 -> M3 represented canonically by its Choi matrix.

    The optional evaluator is a direct implementation of ``X -> Phi(X)``; when absent
    the map is evaluated through the Choi matrix. Both representations agree on all
    matrix units by construction.
    """

    choi: ComplexArray
    evaluator: MatrixEvaluator | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "choi", freeze(as_matrix(self.choi, (DIM2, DIM2), "choi")))

    @classmethod
    def from_evaluator(cls, evaluator: MatrixEvaluator) -> LinearMapM3:
        """Build the map from a direct evaluator."""
        return cls(choi_of_map(evaluator), evaluator)

    @classmethod
    def from_choi(cls, choi: npt.ArrayLike) -> LinearMapM3:
        """Build the map from its Choi matrix."""
        return cls(as_matrix(choi, (DIM2, DIM2), "choi"))

    def __call__(self, x: npt.ArrayLike) -> ComplexArray:
        """Evaluate the map on a 3x3 matrix."""
        matrix = as_matrix(x, (DIM, DIM), "X")
        if self.evaluator is not None:
            return np.asarray(self.evaluator(matrix), dtype=np.complex128)
        return apply_choi(self.choi, matrix)

    def compose(self, inner: LinearMapM3) -> LinearMapM3:
        """Return ``self o inner``."""
        return LinearMapM3(
            compose_choi(self, inner.choi),
            partial(_composed, self, inner),
        )

    def adjoint(self) -> LinearMapM3:
        """Return the adjoint map with respect to the Hilbert-Schmidt product of maps."""
        return adjoint_map(self)

    def is_hermiticity_preserving(self, rtol: float = HERMITIAN_RTOL) -> bool:
        """Check whether the map sends Hermitian matrices to Hermitian matrices."""
        return is_hermitian(self.choi, rtol)


def _composed(outer: LinearMapM3, inner: LinearMapM3, x: ComplexArray) -> ComplexArray:
    return outer(inner(x))


def map_of_choi(choi: npt.ArrayLike) -> LinearMapM3:
    """Return the linear map whose Choi matrix is ``choi``."""
    return LinearMapM3.from_choi(choi)


def hs_inner(c1: npt.ArrayLike, c2: npt.ArrayLike) -> complex:
    """Return the Hilbert-Schmidt product ``Tr(C1 C2*)``, conjugate-linear in the second slot."""
    a = np.asarray(c1, dtype=np.complex128)
    b = np.asarray(c2, dtype=np.complex128)
    return complex(np.vdot(b, a))


def hs_inner_maps(phi: LinearMapM3, psi: LinearMapM3) -> complex:
    """Return ``sum_ij Tr(Phi(e_ij) Psi(e_ij)*)`` evaluated on matrix units."""
    total = 0j
    for i in range(DIM):
        for j in range(DIM):
            unit = matrix_unit(i, j)
            total += np.trace(phi(unit) @ dagger(psi(unit)))
    return complex(total)


def ad_apply(a: npt.ArrayLike, x: npt.ArrayLike) -> ComplexArray:
    """Return ``A X A*``."""
    matrix = as_matrix(a, (DIM, DIM), "A")
    return matrix @ as_matrix(x, (DIM, DIM), "X") @ dagger(matrix)


def vectorize(a: npt.ArrayLike) -> ComplexArray:
    """Return the vector ``alpha`` with ``C_{Ad_A} = |alpha><alpha|``.

    Under the composite index convention ``alpha[(i, k)] = A[k, i]``, i.e. ``alpha``
    stacks the columns of ``A``.
    """
    return as_matrix(a, (DIM, DIM), "A").T.reshape(DIM2).copy()


def unvectorize(alpha: npt.ArrayLike) -> ComplexArray:
    """Inverse of :func:`vectorize`."""
    vector = np.asarray(alpha, dtype=np.complex128).reshape(-1)
    if vector.shape != (DIM2,):
        raise DomainError.wrong_shape("alpha", vector.shape, (DIM2,))
    return vector.reshape(DIM, DIM).T.copy()


def choi_of_ad(a: npt.ArrayLike) -> ComplexArray:
    """Return the Choi matrix of the conjugation map ``Ad_A``, a rank-one projection."""
    alpha = vectorize(a)
    return np.outer(alpha, alpha.conj())


def conjugation_map(a: npt.ArrayLike) -> LinearMapM3:
    """Return ``Ad_A`` as a linear map."""
    matrix = freeze(as_matrix(a, (DIM, DIM), "A"))
    return LinearMapM3(choi_of_ad(matrix), partial(ad_apply, matrix))


def _transpose(x: ComplexArray) -> ComplexArray:
    return x.T


def _identity(x: ComplexArray) -> ComplexArray:
    return x


def identity_map() -> LinearMapM3:
    """Return the identity map on M3."""
    return LinearMapM3.from_evaluator(_identity)


def transpose_map() -> LinearMapM3:
    """Return the transposition map ``X -> X^t``."""
    return LinearMapM3.from_evaluator(_transpose)


def adjoint_map(phi: LinearMapM3) -> LinearMapM3:
    """Return the adjoint of ``phi`` with respect to the map inner product.

    The adjoint is evaluated entrywise on the matrix-unit basis,
    ``Phi*(Y)_ij = Tr(Y Phi(e_ij)*)``, so that ``<Phi o S, P> = <S, Phi* o P>`` holds
    with the same sesquilinear convention as :func:`hs_inner_maps`.
    """
    images = np.empty((DIM, DIM, DIM, DIM), dtype=np.complex128)
    for i in range(DIM):
        for j in range(DIM):
            images[i, j] = phi(matrix_unit(i, j))
    conjugated = freeze(images.conj())

    def evaluate(y: ComplexArray) -> ComplexArray:
        return np.einsum("kl,ijkl->ij", y, conjugated)

    return LinearMapM3.from_evaluator(evaluate)


def compose_choi(phi: LinearMapM3, choi_psi: npt.ArrayLike) -> ComplexArray:
    """Return ``(I (x) Phi) C_Psi``, the Choi matrix of ``Phi o Psi``.

    ``Phi`` is applied to every 3x3 block ``C_Psi[(i, .), (j, .)] = Psi(e_ij)``.
    """
    psi4 = as_tensor(as_matrix(choi_psi, (DIM2, DIM2), "C_Psi"))
    phi4 = as_tensor(phi.choi)
    return np.einsum("ipjq,pkql->ikjl", psi4, phi4).reshape(DIM2, DIM2)


def local_conjugate_choi(
    choi: npt.ArrayLike, a: npt.ArrayLike, b: npt.ArrayLike
) -> ComplexArray:
    """Return ``Ad_{B^t (x) A} C``, the Choi matrix of ``Ad_A o Phi o Ad_B``."""
    matrix = as_matrix(choi, (DIM2, DIM2), "C")
    local = np.kron(as_matrix(b, (DIM, DIM), "B").T, as_matrix(a, (DIM, DIM), "A"))
    return local @ matrix @ dagger(local)


def conjugate_by_product(
    choi: npt.ArrayLike, r: npt.ArrayLike, s: npt.ArrayLike
) -> ComplexArray:
    """Return ``Ad_{R (x) S} C``."""
    matrix = as_matrix(choi, (DIM2, DIM2), "C")
    local = np.kron(as_matrix(r, (DIM, DIM), "R"), as_matrix(s, (DIM, DIM), "S"))
    return local @ matrix @ dagger(local)


def partial_transpose(rho: npt.ArrayLike) -> ComplexArray:
    """Return ``(id (x) t) rho``: ``out[(i, k), (j, l)] = rho[(i, l), (j, k)]``."""
    matrix = as_matrix(rho, (DIM2, DIM2), "rho")
    return as_tensor(matrix).transpose(0, 3, 2, 1).reshape(DIM2, DIM2).copy()


def compress_right(choi: npt.ArrayLike, y: npt.ArrayLike) -> ComplexArray:
    """Pin the second factor: ``M_ij = sum_kl conj(y_k) C[(i,k),(j,l)] y_l``.

    ``<x|M|x> = <x (x) y|C|x (x) y>``.
    """
    matrix = as_matrix(choi, (DIM2, DIM2), "C")
    vector = as_vector(y, "y")
    return np.einsum("k,ikjl,l->ij", vector.conj(), as_tensor(matrix), vector)


def compress_left(choi: npt.ArrayLike, x: npt.ArrayLike) -> ComplexArray:
    """Pin the first factor: ``M_ij = sum_kl conj(x_k) C[(k,i),(l,j)] x_l``.

    ``<y|M|y> = <x (x) y|C|x (x) y>``.
    """
    matrix = as_matrix(choi, (DIM2, DIM2), "C")
    vector = as_vector(x, "x")
    return np.einsum("k,kilj,l->ij", vector.conj(), as_tensor(matrix), vector)


def product_expectation(choi: npt.ArrayLike, x: npt.ArrayLike, y: npt.ArrayLike) -> float:
    """Return the real part of ``<x (x) y|C|x (x) y>``."""
    product = np.kron(as_vector(x, "x"), as_vector(y, "y"))
    return float(np.real(np.vdot(product, np.asarray(choi, dtype=np.complex128) @ product)))


def min_eigenvalue(h: npt.ArrayLike, rtol: float = HERMITIAN_RTOL) -> float:
    """Return the smallest eigenvalue of a Hermitian matrix.

    Raises
    ------
    DomainError
        If the matrix is not Hermitian within ``rtol * |H|_F``.

    """
    hermitian = require_hermitian(h, "H", rtol)
    return float(np.linalg.eigvalsh(hermitian)[0])


def min_eigenpair(h: npt.ArrayLike) -> tuple[float, ComplexArray]:
    """Return the smallest eigenvalue of a Hermitian matrix and a unit eigenvector."""
    hermitian = np.asarray(h, dtype=np.complex128)
    values, vectors = np.linalg.eigh((hermitian + dagger(hermitian)) / 2)
    return float(values[0]), vectors[:, 0]


def numerical_rank(m: npt.ArrayLike, tol: float = RANK_RTOL) -> int:
    """Count singular values above ``tol * sigma_max``."""
    singular_values = np.linalg.svd(np.asarray(m, dtype=np.complex128), compute_uv=False)
    if singular_values.size == 0 or singular_values[0] == 0:
        return 0
    return int(np.count_nonzero(singular_values > tol * singular_values[0]))


def maximally_entangled(*, normalized: bool = False) -> ComplexArray:
    """Return ``|Omega><Omega|`` with ``Omega = sum_i e_i (x) e_i``, optionally divided by 3."""
    projection = choi_of_ad(np.eye(DIM))
    return projection / DIM if normalized else projection


def swap_operator() -> ComplexArray:
    """Return the flip operator ``x (x) y -> y (x) x``, the Choi matrix of transposition."""
    return transpose_map().choi.copy()


@dataclass(frozen=True, eq=False)
class DensityMatrix9:
    """A Hermitian, positive semidefinite, unit-trace 9x9 matrix."""

    matrix: ComplexArray

    @classmethod
    def from_matrix(cls, matrix: npt.ArrayLike, tol: float = 1e-9) -> DensityMatrix9:
        """Validate and wrap a 9x9 matrix.

        Raises
        ------
        DomainError
            If the matrix is not Hermitian, has an eigenvalue below ``-tol`` or its
            trace differs from one by more than ``tol``.

        """
        array = as_matrix(matrix, (DIM2, DIM2), "rho")
        hermitian = require_hermitian(array, "rho")
        trace = float(np.real(np.trace(hermitian)))
        if abs(trace - 1.0) > tol:
            raise DomainError.not_density_matrix(f"trace {trace!r} != 1")
        smallest = float(np.linalg.eigvalsh(hermitian)[0])
        if smallest < -tol:
            raise DomainError.not_density_matrix(f"eigenvalue {smallest!r} < 0")
        return cls(freeze(hermitian))


def random_matrix(
    rng: np.random.Generator, shape: tuple[int, ...] = (DIM, DIM)
) -> ComplexArray:
    """Draw a matrix with independent standard complex Gaussian entries."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unit_vector(rng: np.random.Generator, dim: int = DIM) -> ComplexArray:
    """Draw a Haar-random unit vector in C^dim."""
    vector = random_matrix(rng, (dim,))
    return vector / np.linalg.norm(vector)


def random_hermitian(rng: np.random.Generator, dim: int = DIM2) -> ComplexArray:
    """Draw a random Hermitian matrix (GUE-like)."""
    matrix = random_matrix(rng, (dim, dim))
    return (matrix + dagger(matrix)) / 2
