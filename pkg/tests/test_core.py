"""Tests for the Choi calculus and the linear-algebra helpers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapcone.core import (
    DensityMatrix9,
    DomainError,
    InvalidMapError,
    LinearMapM3,
    ad_apply,
    adjoint_map,
    choi_of_ad,
    choi_of_map,
    compose_choi,
    compress_left,
    compress_right,
    conjugate_by_product,
    conjugation_map,
    dagger,
    hs_inner,
    hs_inner_maps,
    identity_map,
    is_hermitian,
    local_conjugate_choi,
    map_of_choi,
    matrix_unit,
    maximally_entangled,
    min_eigenpair,
    min_eigenvalue,
    numerical_rank,
    partial_transpose,
    product_expectation,
    random_hermitian,
    random_matrix,
    random_unit_vector,
    swap_operator,
    transpose_map,
    unvectorize,
    vectorize,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestChoiOfMap:
    def test_identity_is_maximally_entangled_projection(self):
        assert np.allclose(identity_map().choi, maximally_entangled())

    def test_transpose_is_swap(self):
        expected = np.zeros((9, 9))
        for i in range(3):
            for k in range(3):
                expected[3 * i + k, 3 * k + i] = 1.0
        assert np.allclose(transpose_map().choi, expected)
        assert np.allclose(swap_operator(), expected)

    def test_block_layout(self, rng):
        a = random_matrix(rng)
        phi = conjugation_map(a)
        choi = phi.choi
        for i in range(3):
            for j in range(3):
                block = choi[3 * i : 3 * i + 3, 3 * j : 3 * j + 3]
                assert np.allclose(block, phi(matrix_unit(i, j)))

    def test_non_finite_output_rejected(self):
        with pytest.raises(InvalidMapError):
            choi_of_map(lambda x: np.full((3, 3), np.nan))

    def test_nonlinear_evaluator_rejected(self):
        with pytest.raises(InvalidMapError):
            choi_of_map(lambda x: x @ x)

    def test_affine_evaluator_rejected(self):
        with pytest.raises(InvalidMapError):
            choi_of_map(lambda x: x + np.eye(3))

    def test_linearity_check_can_be_skipped(self):
        choi = choi_of_map(lambda x: x @ x, check_linearity=False)
        assert choi.shape == (9, 9)


class TestMapOfChoi:
    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_round_trip(self, seed):
        choi = random_matrix(np.random.default_rng(seed), (9, 9))
        assert np.allclose(choi_of_map(map_of_choi(choi)), choi, atol=1e-12)

    def test_wrong_shape_rejected(self):
        with pytest.raises(DomainError):
            map_of_choi(np.eye(8))

    def test_non_finite_rejected(self):
        choi = np.eye(9)
        choi[0, 0] = np.inf
        with pytest.raises(DomainError):
            map_of_choi(choi)

    def test_choi_is_read_only(self):
        phi = map_of_choi(np.eye(9))
        with pytest.raises(ValueError, match="read-only"):
            phi.choi[0, 0] = 2.0

    def test_evaluates_through_choi(self, rng):
        a = random_matrix(rng)
        x = random_matrix(rng)
        phi = LinearMapM3.from_choi(choi_of_ad(a))
        assert np.allclose(phi(x), a @ x @ dagger(a))


class TestInnerProducts:
    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_choi_is_isometry(self, seed):
        rng = np.random.default_rng(seed)
        phi = map_of_choi(random_matrix(rng, (9, 9)))
        psi = map_of_choi(random_matrix(rng, (9, 9)))
        assert np.isclose(hs_inner_maps(phi, psi), hs_inner(phi.choi, psi.choi))

    def test_hs_inner_is_conjugate_linear_in_second_slot(self, rng):
        c1 = random_matrix(rng, (9, 9))
        c2 = random_matrix(rng, (9, 9))
        assert np.isclose(hs_inner(c1, 1j * c2), -1j * hs_inner(c1, c2))
        assert np.isclose(hs_inner(c1, c2), np.trace(c1 @ dagger(c2)))


class TestAdjoint:
    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_composition_adjoint(self, seed):
        rng = np.random.default_rng(seed)
        phi, sigma, psi = (map_of_choi(random_matrix(rng, (9, 9))) for _ in range(3))
        lhs = hs_inner_maps(phi.compose(sigma), psi)
        rhs = hs_inner_maps(sigma, adjoint_map(phi).compose(psi))
        assert np.isclose(lhs, rhs)

    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_two_sided_composition_adjoint(self, seed):
        rng = np.random.default_rng(seed)
        theta, phi, sigma, psi = (map_of_choi(random_matrix(rng, (9, 9))) for _ in range(4))
        lhs = hs_inner_maps(theta.compose(phi).compose(sigma), psi)
        rhs = hs_inner_maps(phi, adjoint_map(theta).compose(psi).compose(adjoint_map(sigma)))
        assert np.isclose(lhs, rhs)

    def test_adjoint_of_conjugation(self, rng):
        a = random_matrix(rng)
        assert np.allclose(conjugation_map(a).adjoint().choi, choi_of_ad(dagger(a)))

    def test_adjoint_is_involution(self, rng):
        phi = map_of_choi(random_matrix(rng, (9, 9)))
        assert np.allclose(phi.adjoint().adjoint().choi, phi.choi)

    def test_transpose_is_self_adjoint(self):
        assert np.allclose(transpose_map().adjoint().choi, transpose_map().choi)


class TestConjugation:
    def test_ad_apply(self):
        a = matrix_unit(0, 0)
        assert np.allclose(ad_apply(a, np.ones((3, 3))), matrix_unit(0, 0))

    def test_vectorize_stacks_columns(self):
        a = np.arange(9).reshape(3, 3)
        assert np.array_equal(vectorize(a), [0, 3, 6, 1, 4, 7, 2, 5, 8])

    def test_unvectorize_inverts(self, rng):
        a = random_matrix(rng)
        assert np.allclose(unvectorize(vectorize(a)), a)

    def test_unvectorize_wrong_length(self):
        with pytest.raises(DomainError):
            unvectorize(np.ones(8))

    def test_matrix_unit_vectorization(self):
        alpha = vectorize(matrix_unit(0, 1))
        expected = np.zeros(9)
        expected[3 * 1 + 0] = 1.0
        assert np.array_equal(alpha, expected)
        choi = choi_of_ad(matrix_unit(0, 1))
        assert np.count_nonzero(choi) == 1
        assert np.isclose(np.trace(choi), 1.0)

    def test_choi_of_ad_is_rank_one(self, rng):
        assert numerical_rank(choi_of_ad(random_matrix(rng))) == 1

    def test_choi_of_ad_matches_evaluated_choi(self, rng):
        a = random_matrix(rng)
        evaluated = choi_of_map(lambda x: a @ x @ dagger(a))
        assert np.allclose(evaluated, choi_of_ad(a))


class TestCompose:
    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_compose_choi_matches_composition(self, seed):
        rng = np.random.default_rng(seed)
        phi = map_of_choi(random_matrix(rng, (9, 9)))
        psi = map_of_choi(random_matrix(rng, (9, 9)))
        assert np.allclose(compose_choi(phi, psi.choi), choi_of_map(lambda x: phi(psi(x))))

    def test_identity_is_neutral(self, rng):
        choi = random_matrix(rng, (9, 9))
        assert np.allclose(compose_choi(identity_map(), choi), choi)

    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_transport(self, seed):
        rng = np.random.default_rng(seed)
        phi = map_of_choi(random_matrix(rng, (9, 9)))
        a, b = random_matrix(rng), random_matrix(rng)
        composed = conjugation_map(a).compose(phi).compose(conjugation_map(b))
        assert np.allclose(composed.choi, local_conjugate_choi(phi.choi, a, b))

    def test_transport_preserves_rank_one(self, rng):
        m, a, b = random_matrix(rng), random_matrix(rng), random_matrix(rng)
        transported = local_conjugate_choi(choi_of_ad(m), a, b)
        assert numerical_rank(transported) == 1
        assert np.allclose(transported, choi_of_ad(a @ m @ b))


class TestPartialTranspose:
    def test_maximally_entangled_becomes_swap(self):
        assert np.allclose(partial_transpose(maximally_entangled()), swap_operator())

    def test_maximally_entangled_min_eigenvalue(self):
        rho = maximally_entangled(normalized=True)
        assert np.isclose(min_eigenvalue(partial_transpose(rho)), -1.0 / 3.0)

    def test_diagonal_unchanged(self, rng):
        rho = np.diag(rng.uniform(size=9))
        assert np.allclose(partial_transpose(rho), rho)

    def test_involution(self, rng):
        rho = random_matrix(rng, (9, 9))
        assert np.allclose(partial_transpose(partial_transpose(rho)), rho)

    def test_product_state_stays_positive(self, rng):
        x, y = random_unit_vector(rng), random_unit_vector(rng)
        v = np.kron(x, y)
        assert min_eigenvalue(partial_transpose(np.outer(v, v.conj()))) >= -1e-12


class TestCompressions:
    def test_right_pins_second_factor(self, rng):
        h = random_hermitian(rng)
        x, y = random_unit_vector(rng), random_unit_vector(rng)
        value = np.vdot(x, compress_right(h, y) @ x).real
        assert np.isclose(value, product_expectation(h, x, y))

    def test_left_pins_first_factor(self, rng):
        h = random_hermitian(rng)
        x, y = random_unit_vector(rng), random_unit_vector(rng)
        value = np.vdot(y, compress_left(h, x) @ y).real
        assert np.isclose(value, product_expectation(h, x, y))

    def test_compressions_of_hermitian_are_hermitian(self, rng):
        h = random_hermitian(rng)
        y = random_unit_vector(rng)
        assert is_hermitian(compress_left(h, y))
        assert is_hermitian(compress_right(h, y))

    def test_product_conjugation(self, rng):
        r, s = random_matrix(rng), random_matrix(rng)
        choi = random_hermitian(rng)
        local = np.kron(r, s)
        assert np.allclose(conjugate_by_product(choi, r, s), local @ choi @ dagger(local))


class TestEigen:
    def test_min_eigenvalue_diagonal(self):
        assert min_eigenvalue(np.diag([1.0, 2.0, 3.0])) == pytest.approx(1.0)

    def test_rank_of_diagonal(self):
        assert numerical_rank(np.diag([1.0, 2.0, 3.0])) == 3

    def test_laplacian_is_singular(self):
        m = np.array([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]], dtype=float)
        assert min_eigenvalue(m) == pytest.approx(0.0, abs=1e-12)
        assert numerical_rank(m) == 2

    def test_zero_matrix_has_rank_zero(self):
        assert numerical_rank(np.zeros((3, 3))) == 0

    def test_non_hermitian_rejected(self):
        with pytest.raises(DomainError):
            min_eigenvalue(np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]))

    def test_min_eigenpair(self, rng):
        h = random_hermitian(rng)
        value, vector = min_eigenpair(h)
        assert np.isclose(value, min_eigenvalue(h))
        assert np.allclose(h @ vector, value * vector)


class TestDensityMatrix9:
    def test_accepts_normalized_maximally_entangled(self):
        rho = DensityMatrix9.from_matrix(maximally_entangled(normalized=True))
        assert np.isclose(np.trace(rho.matrix), 1.0)

    def test_rejects_wrong_trace(self):
        with pytest.raises(DomainError, match="trace"):
            DensityMatrix9.from_matrix(maximally_entangled())

    def test_rejects_negative_eigenvalue(self):
        rho = np.diag([2.0, -1.0, 0, 0, 0, 0, 0, 0, 0])
        with pytest.raises(DomainError, match="eigenvalue"):
            DensityMatrix9.from_matrix(rho)

    def test_rejects_non_hermitian(self):
        rho = np.eye(9) / 9
        rho[0, 1] = 0.5
        with pytest.raises(DomainError):
            DensityMatrix9.from_matrix(rho)

    def test_rejects_wrong_shape(self):
        with pytest.raises(DomainError):
            DensityMatrix9.from_matrix(np.eye(8) / 8)
