"""The Ha-Kye family of positive maps on M3 and the structure of its Choi matrices.

For ``t`` in ``[0, 1)`` the map ``Phi_t`` keeps the off-diagonal entries of its
argument up to sign and mixes the diagonal cyclically with the weights
``a_t = (1 - t)^2 / (1 - t + t^2)``, ``b_t = t^2 / (1 - t + t^2)`` and
``c_t = 1 / (1 - t + t^2)``.

Compressions of the Choi matrix are taken over the FIRST tensor factor: with the
composite index convention of :mod:`mapcone.core` this is the compression whose
diagonal reads ``a|y1|^2 + b|y2|^2 + c|y3|^2, ...``. Its determinant ``F_t(y)``
depends only on the squared moduli ``l_i = |y_i|^2`` and vanishes exactly on four
families of vectors ``y``; each singular compression has a one-dimensional kernel
spanned by an explicit vector ``x`` so that ``<y (x) x|C|y (x) x> = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum
from functools import partial
from typing import TYPE_CHECKING

import numpy as np

from mapcone.core import (
    DIM,
    DIM2,
    ComplexArray,
    DomainError,
    LinearMapM3,
    RealArray,
    as_matrix,
    as_tensor,
    as_vector,
    compress_left,
)
from mapcone.logging import get_logger

if TYPE_CHECKING:
    import numpy.typing as npt

logger = get_logger(__name__)

# gamma: 0 -> 1 -> 2 -> 0
CYCLE = (1, 2, 0)


def check_parameter(t: float, name: str = "t") -> float:
    """Return ``t`` as a float, or raise if it is outside ``[0, 1)``."""
    value = float(t)
    if not math.isfinite(value) or not 0.0 <= value < 1.0:
        raise DomainError.out_of_range(name, value, "[0, 1)")
    return value


@dataclass(frozen=True)
class HaKyeParams:
    """The parameter ``t`` with its cached coefficients."""

    t: float
    a: float
    b: float
    c: float

    @property
    def weights(self) -> RealArray:
        """Circulant weight matrix: row ``k`` holds the weights of ``x11, x22, x33``."""
        return np.array(
            [
                [self.a, self.b, self.c],
                [self.c, self.a, self.b],
                [self.b, self.c, self.a],
            ],
        )


def coefficients(t: float) -> HaKyeParams:
    """Return ``(a_t, b_t, c_t)`` for ``t`` in ``[0, 1)``.

    Raises
    ------
    DomainError
        If ``t`` is outside ``[0, 1)``.

    """
    t = check_parameter(t)
    denominator = 1.0 - t + t * t
    return HaKyeParams(
        t=t,
        a=(1.0 - t) ** 2 / denominator,
        b=t * t / denominator,
        c=1.0 / denominator,
    )


def apply_hakye(t: float, x: npt.ArrayLike) -> ComplexArray:
    """Evaluate ``Phi_t(X)``."""
    params = coefficients(t)
    matrix = as_matrix(x, (DIM, DIM), "X")
    image = -matrix
    np.fill_diagonal(image, params.weights @ np.diag(matrix))
    return image


def hakye_map(t: float) -> LinearMapM3:
    """Return ``Phi_t`` as a linear map with a direct evaluator."""
    return LinearMapM3.from_evaluator(partial(apply_hakye, check_parameter(t)))


def choi_hakye(t: float) -> ComplexArray:
    """Return the Choi matrix of ``Phi_t`` in closed form.

    The diagonal is ``(a, c, b, b, a, c, c, b, a)`` and the six entries joining the
    positions ``(i, i)`` and ``(j, j)``, ``i != j``, equal ``-1``; everything else
    vanishes. The trace is ``3 (a + b + c) = 6``.
    """
    params = coefficients(t)
    choi = np.zeros((DIM2, DIM2), dtype=np.complex128)
    np.fill_diagonal(choi, params.weights.T.reshape(DIM2))
    diagonal_positions = [DIM * i + i for i in range(DIM)]
    for p in diagonal_positions:
        for q in diagonal_positions:
            if p != q:
                choi[p, q] = -1.0
    return choi


def compression(t: float, y: npt.ArrayLike) -> ComplexArray:
    """Closed form of the first-factor compression ``<y (x) .|C_t|y (x) .>``.

    Entries: diagonal ``W @ |y|^2`` with the circulant weights, off-diagonal
    ``-conj(y_i) y_j``.
    """
    params = coefficients(t)
    vector = as_vector(y, "y")
    matrix = -np.outer(vector.conj(), vector)
    np.fill_diagonal(matrix, params.weights @ np.abs(vector) ** 2)
    return matrix


@dataclass(frozen=True)
class FConstants:
    """Coefficients of the cubic ``F_t(l1, l2, l3)``."""

    A: float
    B: float
    C: float
    D: float

    @property
    def diagonal_sum(self) -> float:
        """``3A + B + C``, the coefficient of ``l1^2 + l2^2 + l3^2`` in the summed gradient."""
        return 3.0 * self.A + self.B + self.C

    @property
    def cross_sum(self) -> float:
        """``2B + 2C + D``, the coefficient of ``l1 l2 + l2 l3 + l3 l1`` in the summed gradient."""
        return 2.0 * self.B + 2.0 * self.C + self.D


def F_constants(t: float) -> FConstants:
    """Return the coefficients ``A_t, B_t, C_t, D_t`` of the determinant cubic.

    ``D_t = a^3 + b^3 + c^3 + 3abc - 3a - 2``: the ``-3a`` comes from the three
    products of a diagonal entry with the opposite off-diagonal pair.
    """
    p = coefficients(t)
    a, b, c = p.a, p.b, p.c
    return FConstants(
        A=a * b * c,
        B=a * b * b + b * c * c + c * a * a - c,
        C=a * c * c + b * a * a + c * b * b - b,
        D=a**3 + b**3 + c**3 + 3.0 * a * b * c - 3.0 * a - 2.0,
    )


def diagonal_sum_closed_form(t: float) -> float:
    """Return ``(1 - t)^3 / (1 - t + t^2)^2``, the closed form of ``3A_t + B_t + C_t``."""
    t = check_parameter(t)
    return (1.0 - t) ** 3 / (1.0 - t + t * t) ** 2


def F_det(t: float, y: npt.ArrayLike) -> float:
    """Return ``det <y (x) .|C_t|y (x) .>`` computed from the Choi matrix."""
    matrix = compress_left(choi_hakye(t), as_vector(y, "y"))
    return float(np.real(np.linalg.det(matrix)))


def F_poly(
    t: float,
    l1: npt.ArrayLike,
    l2: npt.ArrayLike,
    l3: npt.ArrayLike,
) -> RealArray | float:
    """Evaluate the determinant cubic in the squared moduli; broadcasts over arrays."""
    k = F_constants(t)
    l1, l2, l3 = np.asarray(l1, float), np.asarray(l2, float), np.asarray(l3, float)
    value = (
        k.A * (l1**3 + l2**3 + l3**3)
        + k.B * (l2 * l3**2 + l3 * l1**2 + l1 * l2**2)
        + k.C * (l1 * l3**2 + l2 * l1**2 + l3 * l2**2)
        + k.D * l1 * l2 * l3
    )
    return float(value) if np.ndim(value) == 0 else value


def F_gradient(
    t: float,
    l1: npt.ArrayLike,
    l2: npt.ArrayLike,
    l3: npt.ArrayLike,
) -> RealArray:
    """Return the three partial derivatives of :func:`F_poly`, stacked on axis 0."""
    k = F_constants(t)
    l1, l2, l3 = np.asarray(l1, float), np.asarray(l2, float), np.asarray(l3, float)
    return np.stack(
        [
            3 * k.A * l1**2 + k.B * (2 * l1 * l3 + l2**2) + k.C * (2 * l1 * l2 + l3**2) + k.D * l2 * l3,
            3 * k.A * l2**2 + k.B * (2 * l2 * l1 + l3**2) + k.C * (2 * l2 * l3 + l1**2) + k.D * l3 * l1,
            3 * k.A * l3**2 + k.B * (2 * l3 * l2 + l1**2) + k.C * (2 * l3 * l1 + l2**2) + k.D * l1 * l2,
        ],
    )


def gradient_sum_quadratic(
    t: float,
    l1: npt.ArrayLike,
    l2: npt.ArrayLike,
    l3: npt.ArrayLike,
) -> RealArray | float:
    """Return ``(3A+B+C)(sum l_i^2) + (2B+2C+D)(sum l_i l_j)``."""
    k = F_constants(t)
    l1, l2, l3 = np.asarray(l1, float), np.asarray(l2, float), np.asarray(l3, float)
    value = k.diagonal_sum * (l1**2 + l2**2 + l3**2) + k.cross_sum * (
        l1 * l2 + l2 * l3 + l3 * l1
    )
    return float(value) if np.ndim(value) == 0 else value


def zero_face_ratios(t: float, imag_tol: float = 1e-6) -> RealArray:
    """Return the ratios ``r = l3 / l2`` on the face ``l1 = 0`` where ``F_t`` vanishes.

    On that face the compression splits into ``b + c r`` and a 2x2 block whose
    determinant is ``ab r^2 + (a^2 + bc - 1) r + ac``. For ``t`` in ``(0, 1)`` the
    quadratic has the double root ``1 / t``; at ``t = 0`` it degenerates to the
    nonzero constant ``ac`` and there is no finite ratio.
    """
    p = coefficients(t)
    roots = np.roots([p.a * p.b, p.a * p.a + p.b * p.c - 1.0, p.a * p.c])
    real = [
        float(np.real(root))
        for root in roots
        if abs(np.imag(root)) <= imag_tol * max(1.0, abs(root)) and np.real(root) > 0
    ]
    return np.sort(np.array(real, dtype=float))


class Family(StrEnum):
    """The four families of vectors ``y`` with singular compression."""

    EQUAL_MODULI = "EQUAL_MODULI"
    ZERO_1 = "ZERO_1"
    ZERO_2 = "ZERO_2"
    ZERO_3 = "ZERO_3"

    @property
    def zero_index(self) -> int | None:
        """Index of the vanishing coordinate, ``None`` for the equal-moduli family."""
        return {Family.ZERO_1: 0, Family.ZERO_2: 1, Family.ZERO_3: 2}.get(self)

    @classmethod
    def with_zero_at(cls, index: int) -> Family:
        """Return the family whose coordinate ``index`` vanishes."""
        return (cls.ZERO_1, cls.ZERO_2, cls.ZERO_3)[index]


@dataclass(frozen=True)
class SingularFamily:
    """Moduli of a singular family of ``y`` and of the matching kernel vectors ``x``.

    Phases are free: ``y = moduli * exp(i phi)`` and the kernel vector is
    ``x = kernel_moduli * exp(-i phi)``.
    """

    family_id: Family
    t: float
    moduli: tuple[float, float, float]
    kernel_moduli: tuple[float, float, float]

    def vector(self, phases: npt.ArrayLike = (0.0, 0.0, 0.0)) -> ComplexArray:
        """Return the family member ``y`` with the given coordinate phases."""
        return np.asarray(self.moduli) * np.exp(1j * _phases(phases))

    @staticmethod
    def kernel_phases(phases: npt.ArrayLike) -> RealArray:
        """Phase rule: the kernel vector carries the negated phases of ``y``."""
        return -_phases(phases)

    def to_json(self) -> dict[str, object]:
        """Serialize the family for reports."""
        return {
            "family": self.family_id.value,
            "t": self.t,
            "moduli": list(self.moduli),
            "kernel_moduli": list(self.kernel_moduli),
        }


def _phases(phases: npt.ArrayLike) -> RealArray:
    array = np.asarray(phases, dtype=float).reshape(-1)
    if array.shape != (DIM,):
        raise DomainError.wrong_shape("phases", array.shape, (DIM,))
    return array


def _rotate(values: tuple[float, float, float], zero_index: int) -> tuple[float, float, float]:
    """Place ``(0, s, r)`` so that the zero lands at ``zero_index``."""
    rotated = [0.0, 0.0, 0.0]
    for offset, value in enumerate(values):
        rotated[(zero_index + offset) % DIM] = value
    return (rotated[0], rotated[1], rotated[2])


def singular_y_families(t: float) -> list[SingularFamily]:
    """Return the four families of ``y`` whose compression is singular.

    The zero families are cyclic rotations of ``(0, sqrt(t/(1+t)), sqrt(1/(1+t)))``
    with kernel moduli ``(0, sqrt(1/(1+t)), sqrt(t/(1+t)))`` rotated the same way.
    """
    t = check_parameter(t)
    s = math.sqrt(t / (1.0 + t))
    r = math.sqrt(1.0 / (1.0 + t))
    third = 1.0 / math.sqrt(3.0)
    families = [
        SingularFamily(Family.EQUAL_MODULI, t, (third, third, third), (third, third, third)),
    ]
    for index in range(DIM):
        families.append(
            SingularFamily(
                Family.with_zero_at(index),
                t,
                _rotate((0.0, s, r), index),
                _rotate((0.0, r, s), index),
            ),
        )
    return families


def family(t: float, family_id: Family | str) -> SingularFamily:
    """Return one singular family by identifier."""
    wanted = Family(family_id)
    return next(f for f in singular_y_families(t) if f.family_id == wanted)


def kernel_x(t: float, singular: SingularFamily, phases: npt.ArrayLike) -> ComplexArray:
    """Return the unit vector spanning the kernel of the compression at a family member.

    Raises
    ------
    DomainError
        If the family was produced for a different ``t``.

    """
    t = check_parameter(t)
    if not math.isclose(singular.t, t, rel_tol=0.0, abs_tol=1e-15):
        raise DomainError(
            f"family {singular.family_id.value} belongs to t = {singular.t!r}, not {t!r}",
        )
    return np.asarray(singular.kernel_moduli) * np.exp(1j * singular.kernel_phases(phases))


def permutation_symmetry_check(
    t: float,
    choi: npt.ArrayLike | None = None,
    atol: float = 1e-12,
) -> bool:
    """Check that the Choi matrix is invariant under the 3-cycle on all four indices.

    ``C4[i, k, j, l] == C4[g(i), g(k), g(j), g(l)]`` with ``g = 0 -> 1 -> 2 -> 0``.
    ``choi`` defaults to the Ha-Kye Choi matrix for ``t``.
    """
    matrix = choi_hakye(t) if choi is None else as_matrix(choi, (DIM2, DIM2), "C")
    tensor = as_tensor(matrix)
    g = list(CYCLE)
    permuted = tensor[np.ix_(g, g, g, g)]
    return bool(np.allclose(tensor, permuted, rtol=0.0, atol=atol))


def cyclic_permutation_matrix() -> ComplexArray:
    """Return ``P`` with ``P e_i = e_{g(i)}`` for the 3-cycle ``g``."""
    matrix = np.zeros((DIM, DIM), dtype=np.complex128)
    for i, image in enumerate(CYCLE):
        matrix[image, i] = 1.0
    return matrix


def moduli_grid(steps: int) -> RealArray:
    """Return all squared-moduli triples ``(l1, l2, l3)`` on the simplex with step ``1/steps``."""
    points = [
        (i / steps, j / steps, (steps - i - j) / steps)
        for i in range(steps + 1)
        for j in range(steps + 1 - i)
    ]
    return np.array(points, dtype=float)


def distance_to_families(t: float, squared_moduli: npt.ArrayLike) -> RealArray:
    """Euclidean distance from rows ``(l1, l2, l3)`` to the nearest family in squared moduli."""
    points = np.atleast_2d(np.asarray(squared_moduli, dtype=float))
    family_moduli = np.array([f.moduli for f in singular_y_families(t)]) ** 2
    distances = np.linalg.norm(points[:, None, :] - family_moduli[None, :, :], axis=-1)
    return distances.min(axis=1)
