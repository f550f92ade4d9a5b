"""Local equivalence of Ha-Kye Choi matrices under ``C1 = Ad_{R (x) S} C2``.

The decision follows the structure of the singular sets. A product transform maps
the first-factor compressions of ``C1`` onto those of ``C2``::

    compress_left(C1, y) = S compress_left(C2, R* y) S*

so ``R*`` must carry every singular family at ``t1`` onto a singular family at
``t2``. On the equal-moduli family this forces the rows of ``R*`` to have equal
modulus functions, which for an invertible 3x3 matrix leaves only monomial
matrices ``R* = diag(zeta) P``. The permutation ``P`` then either keeps the cyclic
order of the coordinates (identity, 3-cycles) or reverses it (transpositions), and
following the zero families around the cycle yields ``t1 = t2`` or ``t1 t2 = 1``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING

import numpy as np
from scipy import optimize

from mapcone.core import (
    DIM,
    DIM2,
    ComplexArray,
    DomainError,
    as_matrix,
    conjugate_by_product,
    dagger,
    numerical_rank,
    random_matrix,
)
from mapcone.hakye import (
    Family,
    F_det,
    check_parameter,
    choi_hakye,
    singular_y_families,
)
from mapcone.logging import get_logger

if TYPE_CHECKING:
    import numpy.typing as npt

    from mapcone.hakye import SingularFamily

logger = get_logger(__name__)

IDENTITY = (0, 1, 2)
CYCLES = ((1, 2, 0), (2, 0, 1))
TRANSPOSITIONS = ((1, 0, 2), (0, 2, 1), (2, 1, 0))

_ZERO_ATOL = 1e-12
_TRANSPORT_TOL = 1e-8


# -- moduli-preserving transformations ------------------------------------------


def _phase_tuples(n: int, samples: int, seed: int) -> np.ndarray:
    """Return ``samples`` phase tuples; the first one is all zeros."""
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(samples, n))
    phases[0] = 0.0
    return phases


def _pair(y: npt.ArrayLike, z: npt.ArrayLike) -> tuple[ComplexArray, ComplexArray]:
    first = np.asarray(y, dtype=np.complex128).reshape(-1)
    second = np.asarray(z, dtype=np.complex128).reshape(-1)
    if first.shape != second.shape:
        raise DomainError.wrong_shape("z", second.shape, first.shape)
    return first, second


def moduli_equal_oracle(
    y: npt.ArrayLike,
    z: npt.ArrayLike,
    phase_samples: int = 256,
    seed: int = 0,
    atol: float = 1e-9,
) -> bool:
    """Compare ``|sum y_l e^{i phi_l}|`` and ``|sum z_l e^{i phi_l}|`` on sampled phases.

    One-sided: ``False`` proves the modulus functions differ, ``True`` means no
    sampled phase tuple told them apart.
    """
    if phase_samples < 1:
        raise DomainError.out_of_range("phase_samples", phase_samples, "[1, inf)")
    first, second = _pair(y, z)
    waves = np.exp(1j * _phase_tuples(first.size, phase_samples, seed))
    scale = max(1.0, float(np.abs(first).sum()), float(np.abs(second).sum()))
    difference = np.abs(waves @ first) - np.abs(waves @ second)
    return bool(np.all(np.abs(difference) <= atol * scale))


def moduli_equal_exact(y: npt.ArrayLike, z: npt.ArrayLike, tol: float = _ZERO_ATOL) -> bool:
    """Decide modulus-function equality from the trigonometric coefficients.

    ``|sum y_l e^{i phi_l}|^2`` has constant term ``|y|^2`` and coefficients
    ``y_k conj(y_l)`` on ``e^{i (phi_k - phi_l)}``; two vectors give the same function
    iff all of these agree.
    """
    first, second = _pair(y, z)
    scale = max(1.0, float(np.abs(first).max(initial=0.0)), float(np.abs(second).max(initial=0.0)))
    off = ~np.eye(first.size, dtype=bool)
    cross_first = np.outer(first, first.conj())[off]
    cross_second = np.outer(second, second.conj())[off]
    return bool(
        np.allclose(cross_first, cross_second, rtol=0.0, atol=tol * scale**2)
        and math.isclose(
            float(np.vdot(first, first).real),
            float(np.vdot(second, second).real),
            rel_tol=0.0,
            abs_tol=tol * scale**2,
        ),
    )


class PairKind(StrEnum):
    """Outcome of comparing two vectors coordinate by coordinate."""

    PROPORTIONAL = "PROPORTIONAL"
    SINGLE_NONZERO_EACH = "SINGLE_NONZERO_EACH"
    # same two-point support with the moduli exchanged, e.g. (1, 2, 0) and (2, 1, 0)
    SWAPPED_MODULI = "SWAPPED_MODULI"
    NEITHER = "NEITHER"


@dataclass(frozen=True)
class VectorClass:
    """Classification of a vector pair.

    ``cases`` lists the branch taken at each leading coordinate: 1 both vanish,
    2 only the first vanishes, 3 only the second vanishes, 4 neither vanishes.
    ``factor`` satisfies ``z = factor * y`` for proportional pairs.
    """

    kind: PairKind
    cases: tuple[int, ...]
    moduli_equal: bool
    factor: complex | None = None


def classify_vectors(y: npt.ArrayLike, z: npt.ArrayLike, tol: float = _ZERO_ATOL) -> VectorClass:
    """Classify a pair of vectors by recursion on the leading coordinate."""
    first, second = _pair(y, z)
    scale = max(1.0, float(np.abs(first).max(initial=0.0)), float(np.abs(second).max(initial=0.0)))
    zero_first = np.abs(first) <= tol * scale
    zero_second = np.abs(second) <= tol * scale
    equal = moduli_equal_exact(first, second, tol)

    cases: list[int] = []
    for index in range(first.size):
        if zero_first[index] and zero_second[index]:
            cases.append(1)
            continue
        if zero_first[index] or zero_second[index]:
            cases.append(2 if zero_first[index] else 3)
            single = np.count_nonzero(~zero_first) == 1 and np.count_nonzero(~zero_second) == 1
            kind = PairKind.SINGLE_NONZERO_EACH if single else PairKind.NEITHER
            return VectorClass(kind, tuple(cases), equal)
        cases.append(4)
        factor = complex(second[index] / first[index])
        if np.allclose(second, factor * first, rtol=0.0, atol=tol * scale):
            return VectorClass(PairKind.PROPORTIONAL, tuple(cases), equal, factor)
        kind = PairKind.SWAPPED_MODULI if equal else PairKind.NEITHER
        return VectorClass(kind, tuple(cases), equal)
    return VectorClass(PairKind.PROPORTIONAL, tuple(cases), equal, 1.0 + 0j)


class ModuliKind(StrEnum):
    """Row structure of a square matrix."""

    MONOMIAL = "MONOMIAL"
    PROPORTIONAL_ROWS = "PROPORTIONAL_ROWS"
    GENERIC = "GENERIC"


@dataclass(frozen=True, eq=False)
class MonomialFactors:
    """Factorization ``S = diag(zeta) P`` with ``(P v)_k = v[permutation[k]]``."""

    permutation: tuple[int, ...]
    zeta: ComplexArray

    @property
    def permutation_matrix(self) -> ComplexArray:
        """Return ``P``."""
        return np.eye(len(self.permutation), dtype=np.complex128)[list(self.permutation)]

    def matrix(self) -> ComplexArray:
        """Recompose ``diag(zeta) P``."""
        return np.diag(self.zeta) @ self.permutation_matrix

    def to_json(self) -> dict[str, object]:
        """Serialize for reports."""
        return {
            "permutation": list(self.permutation),
            "zeta": [[float(z.real), float(z.imag)] for z in self.zeta],
        }


@dataclass(frozen=True, eq=False)
class ModuliClass:
    """Row structure of a matrix together with the pairwise modulus test."""

    kind: ModuliKind
    rows_moduli_equal: bool
    monomial: MonomialFactors | None = None
    proportional_rows: tuple[int, int] | None = None

    def to_json(self) -> dict[str, object]:
        """Serialize for reports."""
        return {
            "kind": self.kind.value,
            "rows_moduli_equal": self.rows_moduli_equal,
            "monomial": None if self.monomial is None else self.monomial.to_json(),
            "proportional_rows": None if self.proportional_rows is None else list(self.proportional_rows),
        }


def _square(x: npt.ArrayLike) -> ComplexArray:
    matrix = np.asarray(x, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:  # noqa: PLR2004
        raise DomainError.wrong_shape("X", matrix.shape, (DIM, DIM))
    if not np.all(np.isfinite(matrix)):
        raise DomainError.non_finite("X")
    return matrix


def _row_supports(matrix: ComplexArray, tol: float) -> list[np.ndarray]:
    scale = max(1.0, float(np.abs(matrix).max(initial=0.0)))
    return [np.flatnonzero(np.abs(row) > tol * scale) for row in matrix]


def classify_matrix(x: npt.ArrayLike, tol: float = _ZERO_ATOL) -> ModuliClass:
    """Classify the rows of a square matrix pairwise."""
    matrix = _square(x)
    pairs = {
        (i, j): classify_vectors(matrix[i], matrix[j], tol)
        for i, j in itertools.combinations(range(matrix.shape[0]), 2)
    }
    rows_equal = all(result.moduli_equal for result in pairs.values())
    proportional = next(
        (pair for pair, result in pairs.items() if result.kind is PairKind.PROPORTIONAL),
        None,
    )
    if proportional is not None:
        return ModuliClass(ModuliKind.PROPORTIONAL_ROWS, rows_equal, proportional_rows=proportional)
    if all(support.size == 1 for support in _row_supports(matrix, tol)):
        return ModuliClass(ModuliKind.MONOMIAL, rows_equal, monomial=_factor(matrix, tol))
    return ModuliClass(ModuliKind.GENERIC, rows_equal)


def _factor(matrix: ComplexArray, tol: float) -> MonomialFactors:
    permutation = tuple(int(support[0]) for support in _row_supports(matrix, tol))
    zeta = np.array([matrix[k, column] for k, column in enumerate(permutation)])
    zeta.flags.writeable = False
    return MonomialFactors(permutation, zeta)


def monomial_decompose(s: npt.ArrayLike, tol: float = _ZERO_ATOL) -> MonomialFactors | None:
    """Return ``(P, zeta)`` with ``S = diag(zeta) P``, or ``None`` if ``S`` is not monomial."""
    result = classify_matrix(s, tol)
    return result.monomial if result.kind is ModuliKind.MONOMIAL else None


def rows_moduli_equal_oracle(
    x: npt.ArrayLike, phase_samples: int = 256, seed: int = 0
) -> bool:
    """Apply :func:`moduli_equal_oracle` to every row pair."""
    matrix = _square(x)
    return all(
        moduli_equal_oracle(matrix[i], matrix[j], phase_samples, seed)
        for i, j in itertools.combinations(range(matrix.shape[0]), 2)
    )


# -- obstruction records -----------------------------------------------------------


class Status(StrEnum):
    """Outcome of one step of the inequivalence argument."""

    FORCED = "FORCED"
    UNSUPPORTED = "UNSUPPORTED"
    CONTRADICTION = "CONTRADICTION"
    CONSISTENT = "CONSISTENT"


@dataclass(frozen=True)
class RatioConstraint:
    """``|zeta_a|^2 / |zeta_b|^2 = value`` required to send ``source`` onto ``image``."""

    source: Family
    image: Family
    numerator: int
    denominator: int
    value: float

    def to_json(self) -> dict[str, object]:
        """Serialize for reports."""
        return {
            "source": self.source.value,
            "image": self.image.value,
            "ratio": [self.numerator, self.denominator],
            "value": self.value,
        }


@dataclass(frozen=True)
class ObstructionRecord:
    """One step of a local-inequivalence certificate."""

    tag: str
    claim: str
    status: Status
    permutation: tuple[int, ...] | None = None
    relation: str | None = None
    required: float | None = None
    actual: float | None = None
    constraints: tuple[RatioConstraint, ...] = field(default=())

    def to_json(self) -> dict[str, object]:
        """Serialize for reports."""
        return {
            "tag": self.tag,
            "claim": self.claim,
            "status": self.status.value,
            "permutation": None if self.permutation is None else list(self.permutation),
            "relation": self.relation,
            "required": self.required,
            "actual": self.actual,
            "constraints": [c.to_json() for c in self.constraints],
        }


def _check_permutation(permutation: tuple[int, ...]) -> tuple[int, int, int]:
    perm = tuple(int(p) for p in permutation)
    if sorted(perm) != list(range(DIM)):
        raise DomainError(f"{permutation!r} is not a permutation of (0, 1, 2)")
    return (perm[0], perm[1], perm[2])


def preserves_cyclic_order(permutation: tuple[int, ...]) -> bool:
    """True for the identity and the 3-cycles, False for transpositions."""
    perm = _check_permutation(permutation)
    return all(perm[(j + 1) % DIM] == (perm[j] + 1) % DIM for j in range(DIM))


def _zero_pattern_record(
    t1: float, t2: float, perm: tuple[int, int, int], tag: str
) -> ObstructionRecord:
    """Compare zero patterns directly when a parameter vanishes.

    At ``t = 0`` the zero families collapse to single basis vectors, so the modulus
    ratios are undefined; a monomial ``R*`` can only map families onto families when
    the support sizes survive the permutation.
    """

    def supports(t: float) -> set[frozenset[int]]:
        return {
            frozenset(int(k) for k in np.flatnonzero(np.asarray(f.moduli) > 0))
            for f in singular_y_families(t)
            if f.family_id is not Family.EQUAL_MODULI
        }

    admissible = supports(t2)
    images = {frozenset(k for k in range(DIM) if perm[k] in source) for source in supports(t1)}
    consistent = images <= admissible
    return ObstructionRecord(
        tag=tag,
        claim="zero families must map onto zero families",
        status=Status.CONSISTENT if consistent else Status.CONTRADICTION,
        permutation=perm,
        relation="support pattern preserved",
        required=None,
        actual=None,
    )


def modulus_chain(t1: float, t2: float, permutation: tuple[int, ...]) -> ObstructionRecord:
    """Follow the zero families of ``t1`` through ``R* = diag(zeta) P``.

    The family with zero at ``i`` lands on the family with zero at ``j`` where
    ``permutation[j] = i``; matching the remaining moduli fixes one ratio of the
    ``|zeta_k|^2`` per family. The three ratios multiply to one, which forces
    ``t1 = t2`` for order-preserving permutations and ``t1 t2 = 1`` otherwise.
    """
    t1 = check_parameter(t1, "t1")
    t2 = check_parameter(t2, "t2")
    perm = _check_permutation(permutation)
    preserving = preserves_cyclic_order(perm)
    tag = "cycle-equality" if preserving else "transposition-product"
    if t1 == 0.0 or t2 == 0.0:
        return _zero_pattern_record(t1, t2, perm, tag)

    constraints = []
    for i in range(DIM):
        j = perm.index(i)
        value = t2 / t1 if preserving else t1 * t2
        constraints.append(
            RatioConstraint(
                source=Family.with_zero_at(i),
                image=Family.with_zero_at(j),
                numerator=(j + 1) % DIM,
                denominator=(j + 2) % DIM,
                value=value,
            ),
        )
    if preserving:
        # product of the three ratios is (t2 / t1)^3 = 1
        relation, required, actual = "t1 = t2", t1, t2
    else:
        # product of the three ratios is (t1 t2)^3 = 1
        relation, required, actual = "t1 * t2 = 1", 1.0, t1 * t2
    consistent = math.isclose(required, actual, rel_tol=1e-12, abs_tol=1e-15)
    return ObstructionRecord(
        tag=tag,
        claim="ratios of |zeta_k|^2 around the cycle multiply to one",
        status=Status.CONSISTENT if consistent else Status.CONTRADICTION,
        permutation=perm,
        relation=relation,
        required=required,
        actual=actual,
        constraints=tuple(constraints),
    )


def transposition_obstruction(t1: float, t2: float, transposition: tuple[int, ...]) -> ObstructionRecord:
    """Return the forced relation ``t1 t2 = 1`` for a monomial transform with a transposition.

    Raises
    ------
    DomainError
        If ``transposition`` keeps the cyclic order.

    """
    if preserves_cyclic_order(transposition):
        raise DomainError(f"{transposition!r} is not a transposition")
    return modulus_chain(t1, t2, transposition)


def cycle_obstruction(t1: float, t2: float, cycle: tuple[int, ...]) -> ObstructionRecord:
    """Return the forced relation ``t1 = t2`` for the identity or a 3-cycle.

    Raises
    ------
    DomainError
        If ``cycle`` is a transposition.

    """
    if not preserves_cyclic_order(cycle):
        raise DomainError(f"{cycle!r} is neither the identity nor a 3-cycle")
    return modulus_chain(t1, t2, cycle)


# -- singular-set transport ------------------------------------------------------------


def _require_invertible(transform: npt.ArrayLike, name: str = "R") -> ComplexArray:
    matrix = as_matrix(transform, (DIM, DIM), name)
    if numerical_rank(matrix) < DIM:
        raise DomainError.singular(name)
    return matrix


def _maps_family(
    t2: float,
    adjoint: ComplexArray,
    singular: SingularFamily,
    phases: np.ndarray,
    tol: float,
) -> bool:
    """Return whether ``adjoint`` sends every sampled member of ``singular`` to a zero of ``F_t2``."""
    for phase in phases:
        image = adjoint @ singular.vector(phase)
        image /= np.linalg.norm(image)
        if abs(F_det(t2, image)) >= tol:
            return False
    return True


def singular_set_transport_check(
    t1: float,
    t2: float,
    transform: npt.ArrayLike,
    phase_samples: int = 64,
    seed: int = 0,
    tol: float = _TRANSPORT_TOL,
) -> bool:
    """Test whether ``transform*`` maps the singular families at ``t1`` into those at ``t2``.

    ``transform`` is the first-factor matrix ``R`` of a candidate equivalence. The
    check is necessary for ``C1 = Ad_{R (x) S} C2`` and returns False at the first
    sampled family member whose image has ``F_t2 >= tol``. For the equal-moduli family
    the rows of ``R*`` must also have equal modulus functions.

    Raises
    ------
    DomainError
        If ``transform`` is singular.

    """
    t1 = check_parameter(t1, "t1")
    t2 = check_parameter(t2, "t2")
    adjoint = dagger(_require_invertible(transform))
    phases = _phase_tuples(DIM, phase_samples, seed)
    for singular in singular_y_families(t1):
        if singular.family_id is Family.EQUAL_MODULI and not rows_moduli_equal_oracle(
            adjoint, phase_samples, seed
        ):
            return False
        if not _maps_family(t2, adjoint, singular, phases, tol):
            return False
    return True


# -- numeric search ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EquivalenceSearch:
    """Best product transform found by the numerical search.

    ``residual`` is ``|C1 - Ad_{R (x) S} C2|_F / |C1|_F``; ``R`` and ``S`` are
    balanced to equal spectral norm since ``(cR, S / c)`` gives the same transform.
    """

    r: ComplexArray
    s: ComplexArray
    residual: float
    restarts_used: int


def _unpack(params: np.ndarray) -> tuple[ComplexArray, ComplexArray]:
    r = (params[0:9] + 1j * params[9:18]).reshape(DIM, DIM)
    s = (params[18:27] + 1j * params[27:36]).reshape(DIM, DIM)
    return r, s


def _objective(
    params: np.ndarray, target: ComplexArray, source: ComplexArray
) -> tuple[float, np.ndarray]:
    """Return ``|K C2 K* - C1|_F^2`` and its gradient for ``K = R (x) S``."""
    r, s = _unpack(params)
    k = np.kron(r, s)
    error = k @ source @ dagger(k) - target
    value = float(np.vdot(error, error).real)
    gradient = 2.0 * (error @ k @ dagger(source) + dagger(error) @ k @ source)
    g4 = gradient.reshape(DIM, DIM, DIM, DIM)
    grad_r = np.einsum("ikjl,kl->ij", g4, s.conj())
    grad_s = np.einsum("ikjl,ij->kl", g4, r.conj())
    packed = np.concatenate(
        [grad_r.real.ravel(), grad_r.imag.ravel(), grad_s.real.ravel(), grad_s.imag.ravel()],
    )
    return value, packed


def _balance(r: ComplexArray, s: ComplexArray) -> tuple[ComplexArray, ComplexArray]:
    norm_r = np.linalg.norm(r, 2)
    norm_s = np.linalg.norm(s, 2)
    if norm_r == 0 or norm_s == 0:
        return r, s
    c = np.sqrt(norm_s / norm_r)
    return r * c, s / c


def numeric_search_equiv(
    c1: npt.ArrayLike,
    c2: npt.ArrayLike,
    *,
    restarts: int = 64,
    iters: int = 500,
    seed: int = 0,
    workers: int = 1,
) -> EquivalenceSearch:
    """Minimize ``|C1 - Ad_{R (x) S} C2|_F`` over invertible ``R`` and ``S``.

    Both matrices are scaled to unit Frobenius norm first. Start 0 is ``R = S = I``;
    the other starts are complex Gaussian matrices from streams spawned off
    ``seed``. Each start runs L-BFGS-B with the analytic gradient; the best start
    wins, ties going to the lowest index.
    """
    if restarts < 1:
        raise DomainError.out_of_range("restarts", restarts, "[1, inf)")
    first = as_matrix(c1, (DIM2, DIM2), "C1")
    second = as_matrix(c2, (DIM2, DIM2), "C2")
    norm_first = float(np.linalg.norm(first))
    norm_second = float(np.linalg.norm(second))
    if norm_first == 0 or norm_second == 0:
        raise DomainError("Choi matrices must be nonzero")
    target = first / norm_first
    source = second / norm_second

    identity = np.concatenate([np.eye(DIM).ravel(), np.zeros(9), np.eye(DIM).ravel(), np.zeros(9)])
    starts = [identity]
    for child in np.random.SeedSequence(seed).spawn(restarts - 1):
        rng = np.random.default_rng(child)
        r, s = random_matrix(rng), random_matrix(rng)
        starts.append(np.concatenate([r.real.ravel(), r.imag.ravel(), s.real.ravel(), s.imag.ravel()]))

    def run(start: np.ndarray) -> optimize.OptimizeResult:
        return optimize.minimize(
            _objective,
            start,
            args=(target, source),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": iters, "ftol": 1e-30, "gtol": 1e-14},
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run, starts))
    else:
        results = [run(start) for start in starts]
    index, best = min(enumerate(results), key=lambda item: (float(item[1].fun), item[0]))
    r, s = _unpack(best.x)
    # undo the normalization: C1 = (|C1| / |C2|) Ad_{R (x) S} C2
    r = r * np.sqrt(norm_first / norm_second)
    r, s = _balance(r, s)
    residual = float(np.linalg.norm(first - conjugate_by_product(second, r, s)) / norm_first)
    logger.debug("numeric search: best residual %.3e from start %d", residual, index)
    return EquivalenceSearch(r=r, s=s, residual=residual, restarts_used=restarts)


def planted_equivalence(
    choi: npt.ArrayLike, seed: int = 0
) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
    """Return random invertible ``(R0, S0)`` and ``Ad_{R0 (x) S0} C`` for search self-tests."""
    matrix = as_matrix(choi, (DIM2, DIM2), "C")
    rng = np.random.default_rng(seed)
    while True:
        r0 = np.eye(DIM) + 0.5 * random_matrix(rng)
        s0 = np.eye(DIM) + 0.5 * random_matrix(rng)
        if np.linalg.cond(r0) < 1e2 and np.linalg.cond(s0) < 1e2:  # noqa: PLR2004
            return r0, s0, conjugate_by_product(matrix, r0, s0)


# -- decision ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EquivalenceVerdict:
    """Outcome of :func:`decide_local_equivalence`.

    ``certified`` is False only if some step of the argument failed to go through;
    ``equivalent`` is then False as well but unproven.
    """

    t1: float
    t2: float
    equivalent: bool
    certified: bool
    certificate: tuple[ObstructionRecord, ...]
    witness: tuple[ComplexArray, ComplexArray] | None = None
    numeric_residual: float | None = None

    def to_json(self) -> dict[str, object]:
        """Serialize for reports."""
        witness = None
        if self.witness is not None:
            witness = {
                name: [[[float(z.real), float(z.imag)] for z in row] for row in matrix]
                for name, matrix in zip(("R", "S"), self.witness, strict=True)
            }
        return {
            "t1": self.t1,
            "t2": self.t2,
            "equivalent": self.equivalent,
            "certified": self.certified,
            "certificate": [record.to_json() for record in self.certificate],
            "witness": witness,
            "numeric_residual": self.numeric_residual,
        }


def _monomial_candidate(
    permutation: tuple[int, ...], moduli: tuple[float, ...], seed: int
) -> ComplexArray:
    """Return ``diag(zeta) P`` with ``|zeta| = moduli`` and seeded phases."""
    rng = np.random.default_rng(seed)
    zeta = np.asarray(moduli) * np.exp(1j * rng.uniform(0.0, 2 * np.pi, DIM))
    return MonomialFactors(_check_permutation(permutation), zeta).matrix()


def _fitted_moduli(chain: ObstructionRecord) -> tuple[float, ...]:
    """Solve the ratio constraints of ``chain`` for ``|zeta|``, starting from one.

    Each constraint is applied once, walking the cycle from the first denominator,
    so the returned moduli satisfy all but the closing ratio. Chains without
    constraints (a vanishing parameter) give uniform moduli.
    """
    if not chain.constraints:
        return (1.0,) * DIM
    squared = {chain.constraints[0].denominator: 1.0}
    for _ in range(DIM):
        for constraint in chain.constraints:
            if constraint.denominator in squared and constraint.numerator not in squared:
                squared[constraint.numerator] = squared[constraint.denominator] * constraint.value
    return tuple(math.sqrt(squared[k]) for k in range(DIM))


def _equal_moduli_record(
    t1: float,
    t2: float,
    chains: tuple[ObstructionRecord, ...],
    phase_samples: int,
    seed: int,
) -> ObstructionRecord:
    """Show the equal-moduli family at ``t1`` only stays singular at ``t2`` under equal rows.

    For every permutation the candidate with uniform ``|zeta|`` keeps the family on
    ``F_t2 = 0``. The candidate fitted to the zero-family ratios of the chain has
    unequal rows once ``t1 != t2`` and must lose it.
    """
    phases = _phase_tuples(DIM, min(phase_samples, 16), seed)
    families = [f for f in singular_y_families(t1) if f.family_id is Family.EQUAL_MODULI]
    forced = len(families) == 1
    for chain in chains:
        if not forced:
            break
        uniform = _monomial_candidate(chain.permutation, (1.0,) * DIM, seed)
        forced = _maps_family(t2, uniform, families[0], phases, _TRANSPORT_TOL)
        if forced and chain.constraints:
            fitted = _monomial_candidate(chain.permutation, _fitted_moduli(chain), seed)
            forced = not rows_moduli_equal_oracle(fitted, phase_samples, seed) and not _maps_family(
                t2, fitted, families[0], phases, _TRANSPORT_TOL
            )
    return ObstructionRecord(
        tag="equal-moduli-rows",
        claim="rows of R* have equal modulus functions, so R* is monomial or has proportional rows",
        status=Status.FORCED if forced else Status.UNSUPPORTED,
    )


def _monomial_record(
    t1: float,
    t2: float,
    chains: tuple[ObstructionRecord, ...],
    phase_samples: int,
    seed: int,
) -> ObstructionRecord:
    """Show that no invertible ``R* = diag(zeta) P`` carries the singular set of ``t1`` to ``t2``.

    Collapsing a row of each candidate onto another gives proportional rows and a
    singular matrix, so only the monomial branch is left. Every permutation is then
    tried with uniform ``|zeta|``, the only moduli the equal-moduli family admits.
    """
    forced = True
    for chain in chains:
        candidate = _monomial_candidate(chain.permutation, (1.0,) * DIM, seed)
        collapsed = candidate.copy()
        collapsed[1] = 2.0 * candidate[0]
        factors = monomial_decompose(candidate)
        forced = (
            factors is not None
            and factors.permutation == chain.permutation
            and classify_matrix(collapsed).kind is ModuliKind.PROPORTIONAL_ROWS
            and numerical_rank(collapsed) < DIM
            and not singular_set_transport_check(
                t1, t2, dagger(candidate), min(phase_samples, 16), seed
            )
        )
        if not forced:
            break
    return ObstructionRecord(
        tag="monomial-structure",
        claim="invertibility excludes proportional rows, so R* = diag(zeta) P",
        status=Status.FORCED if forced else Status.UNSUPPORTED,
    )


def decide_local_equivalence(
    t1: float,
    t2: float,
    *,
    numeric: bool = False,
    restarts: int = 64,
    iters: int = 500,
    phase_samples: int = 256,
    seed: int = 0,
    workers: int = 1,
) -> EquivalenceVerdict:
    """Decide whether ``C_{Phi_t1} = Ad_{R (x) S} C_{Phi_t2}`` for some invertible ``R, S``.

    Equal parameters are witnessed by ``R = S = I``. Otherwise the certificate lists
    the forced monomial structure followed by one modulus chain per permutation;
    every chain must end in a contradiction. With ``numeric`` the search
    residual is attached as independent evidence.
    """
    t1 = check_parameter(t1, "t1")
    t2 = check_parameter(t2, "t2")
    c1, c2 = choi_hakye(t1), choi_hakye(t2)
    residual = None
    if numeric:
        residual = numeric_search_equiv(
            c1, c2, restarts=restarts, iters=iters, seed=seed, workers=workers
        ).residual

    if t1 == t2:
        identity = np.eye(DIM, dtype=np.complex128)
        exact = float(np.linalg.norm(c1 - conjugate_by_product(c2, identity, identity)))
        return EquivalenceVerdict(
            t1=t1,
            t2=t2,
            equivalent=True,
            certified=True,
            certificate=(),
            witness=(identity, identity),
            numeric_residual=exact if residual is None else min(exact, residual),
        )

    chains = tuple(
        [transposition_obstruction(t1, t2, p) for p in TRANSPOSITIONS]
        + [cycle_obstruction(t1, t2, p) for p in (IDENTITY, *CYCLES)],
    )
    structure = (
        _equal_moduli_record(t1, t2, chains, phase_samples, seed),
        _monomial_record(t1, t2, chains, phase_samples, seed),
    )
    certified = all(r.status is Status.FORCED for r in structure) and all(
        r.status is Status.CONTRADICTION for r in chains
    )
    if not certified:
        logger.warning("inequivalence argument incomplete for t1=%s, t2=%s", t1, t2)
    return EquivalenceVerdict(
        t1=t1,
        t2=t2,
        equivalent=False,
        certified=certified,
        certificate=structure + chains,
        numeric_residual=residual,
    )
