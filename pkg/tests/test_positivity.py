"""Tests for block positivity, PPT and the witness criterion."""

import numpy as np
import pytest

from mapcone import hakye
from mapcone.core import (
    DensityMatrix9,
    DomainError,
    choi_of_ad,
    conjugation_map,
    dagger,
    identity_map,
    map_of_choi,
    maximally_entangled,
    product_expectation,
    random_hermitian,
    random_matrix,
    random_unit_vector,
    swap_operator,
    transpose_map,
    vectorize,
)
from mapcone.positivity import (
    ProductVector,
    alternating_descent,
    compression_rank_profile,
    is_block_positive,
    is_completely_positive,
    is_ppt,
    is_separable_choi_sample,
    pairing,
    pairing_criterion,
    product_min,
    separable_sample,
    superpositive_sample,
    witness_apply,
)


@pytest.fixture
def maxent():
    return DensityMatrix9.from_matrix(maximally_entangled(normalized=True))


class TestProductVector:
    def test_kron(self):
        x, y = np.array([1, 0, 0]), np.array([0, 1, 0])
        assert np.array_equal(ProductVector(x, y).vector, np.kron(x, y))

    def test_rejects_non_unit(self):
        with pytest.raises(DomainError):
            ProductVector(np.array([1, 1, 0]), np.array([1, 0, 0]))

    def test_rejects_wrong_shape(self):
        with pytest.raises(DomainError):
            ProductVector(np.array([1, 0]), np.array([1, 0, 0]))


class TestAlternatingDescent:
    def test_values_never_increase(self, rng):
        choi = hakye.choi_hakye(0.3)
        descent = alternating_descent(choi, random_unit_vector(rng))
        steps = np.diff(descent.values)
        assert np.all(steps <= 1e-12)

    def test_value_matches_argmin(self, rng):
        choi = -maximally_entangled()
        descent = alternating_descent(choi, random_unit_vector(rng))
        expected = product_expectation(choi, descent.argmin.x, descent.argmin.y)
        assert descent.value == pytest.approx(expected)

    def test_last_value_is_final_sweep(self, rng):
        descent = alternating_descent(hakye.choi_hakye(0.6), random_unit_vector(rng))
        assert descent.values[-1] == pytest.approx(descent.value, abs=1e-10)


class TestProductMin:
    def test_positive_definite(self):
        verdict = product_min(np.eye(9), restarts=4)
        assert verdict.min_value == pytest.approx(1.0)

    def test_swap_is_block_positive(self):
        verdict = product_min(swap_operator(), restarts=8)
        assert verdict.min_value == pytest.approx(0.0, abs=1e-9)

    def test_entangled_projection(self):
        verdict = product_min(np.eye(9) - 2 * maximally_entangled(), restarts=16)
        assert verdict.min_value == pytest.approx(-1.0, abs=1e-8)

    @pytest.mark.parametrize("t", [0.0, 0.3, 0.7])
    def test_hakye_is_block_positive(self, t):
        verdict = product_min(hakye.choi_hakye(t), restarts=16)
        assert verdict.min_value >= -1e-8
        assert verdict.min_value <= 1e-3

    def test_deterministic_for_seed(self):
        choi = hakye.choi_hakye(0.4)
        first = product_min(choi, restarts=8, seed=3)
        second = product_min(choi, restarts=8, seed=3)
        assert first.min_value == second.min_value
        assert np.array_equal(first.argmin.x, second.argmin.x)

    def test_independent_of_workers(self):
        choi = hakye.choi_hakye(0.4)
        serial = product_min(choi, restarts=8, seed=5)
        threaded = product_min(choi, restarts=8, seed=5, workers=3)
        assert serial.min_value == threaded.min_value

    def test_to_json(self):
        report = product_min(np.eye(9), restarts=2).to_json()
        assert set(report) == {"min_value", "argmin", "restarts_used", "converged"}
        assert len(report["argmin"]["x"]) == 3

    def test_rejects_non_hermitian(self, rng):
        with pytest.raises(DomainError):
            product_min(random_matrix(rng, (9, 9)))

    def test_rejects_zero_restarts(self):
        with pytest.raises(DomainError):
            product_min(np.eye(9), restarts=0)


def quadratic_forms(choi, alphas):
    return np.einsum("ki,ij,kj->k", alphas.conj(), choi, alphas).real


def gaussian_vectors(rng, n):
    return rng.standard_normal((n, 9)) + 1j * rng.standard_normal((n, 9))


class TestSignChain:
    def test_psd_choi_has_nonnegative_forms(self, rng):
        g = random_matrix(rng, (9, 9))
        values = quadratic_forms(g @ dagger(g), gaussian_vectors(rng, 10_000))
        assert values.min() >= -1e-9

    @pytest.mark.parametrize("t", [0.0, 0.5])
    def test_negative_eigenvalue_shows_in_forms(self, rng, t):
        a = hakye.coefficients(t).a
        omega = vectorize(np.eye(3)) / np.sqrt(3)
        alphas = omega + 0.02 * gaussian_vectors(rng, 10_000)
        alphas /= np.linalg.norm(alphas, axis=1, keepdims=True)
        values = quadratic_forms(hakye.choi_hakye(t), alphas)
        assert values.min() >= a - 2 - 1e-9
        assert values.min() < 0
        assert values.min() == pytest.approx(a - 2, abs=0.02)

    def test_completely_positive_implies_block_positive(self, rng):
        for _ in range(50):
            g = random_matrix(rng, (9, 9))
            choi = g @ dagger(g)
            assert is_completely_positive(choi)
            assert is_block_positive(choi, restarts=2)


class TestConePredicates:
    def test_block_positive(self):
        assert is_block_positive(swap_operator(), restarts=8)
        assert not is_block_positive(-np.eye(9), restarts=2)

    def test_completely_positive(self, rng):
        assert is_completely_positive(choi_of_ad(random_matrix(rng)))
        assert not is_completely_positive(hakye.choi_hakye(0.5))

    def test_ppt(self, maxent):
        _, rho = separable_sample(4, seed=1)
        assert is_ppt(rho)
        assert not is_ppt(maxent)

    def test_ppt_accepts_raw_matrix(self):
        assert is_ppt(np.eye(9) / 9)


class TestWitness:
    @pytest.mark.parametrize("t", [0.0, 0.5, 0.95])
    def test_hakye_detects_maximally_entangled(self, t, maxent):
        a = hakye.coefficients(t).a
        value = witness_apply(hakye.hakye_map(t), np.eye(3), maxent)
        assert value == pytest.approx((a - 2) / 3)

    def test_transpose_detects_maximally_entangled(self, maxent):
        assert witness_apply(transpose_map(), np.eye(3), maxent) == pytest.approx(-1 / 3)

    def test_separable_states_not_flagged(self, rng):
        phi = hakye.hakye_map(0.4)
        for seed in range(5):
            _, rho = separable_sample(3, seed=seed)
            assert witness_apply(phi, random_matrix(rng), rho) >= -1e-9

    def test_identity_map_never_flags(self, maxent):
        assert witness_apply(identity_map(), np.eye(3), maxent) >= -1e-12

    def test_rejects_non_hermiticity_preserving(self, rng, maxent):
        phi = map_of_choi(random_matrix(rng, (9, 9)))
        with pytest.raises(DomainError):
            witness_apply(phi, np.eye(3), maxent)


class TestPairing:
    def test_identity_self_pairing(self):
        assert pairing(identity_map(), identity_map()) == pytest.approx(9.0)

    def test_conjugation_pairing_is_quadratic_form(self, rng):
        a = random_matrix(rng)
        choi = random_hermitian(rng)
        alpha = vectorize(a)
        expected = float(np.real(np.vdot(alpha, choi @ alpha)))
        assert pairing(conjugation_map(a), map_of_choi(choi)) == pytest.approx(expected)

    @pytest.mark.parametrize("t", [0.0, 0.3, 0.5, 0.9])
    def test_hakye_against_maximally_entangled(self, t):
        a = hakye.coefficients(t).a
        omega = map_of_choi(maximally_entangled())
        assert pairing(hakye.hakye_map(t), omega) == pytest.approx(3 * a - 6)

    def test_rejects_non_hermiticity_preserving(self, rng):
        with pytest.raises(DomainError):
            pairing(map_of_choi(random_matrix(rng, (9, 9))), identity_map())

    def test_criterion_agrees_on_entangled_state(self, maxent):
        criterion = pairing_criterion(hakye.hakye_map(0.5), np.eye(3), maxent, samples=16)
        assert criterion.witness_value < 0
        assert criterion.min_pairing == pytest.approx(criterion.witness_value, abs=1e-9)
        assert criterion.agree
        assert criterion.directions == 9 + 16

    def test_criterion_agrees_on_separable_state(self, rng):
        _, rho = separable_sample(2, seed=7)
        criterion = pairing_criterion(hakye.hakye_map(0.2), random_matrix(rng), rho, samples=16)
        assert criterion.witness_value >= -1e-9
        assert criterion.min_pairing >= criterion.witness_value - 1e-9
        assert criterion.agree


class TestSamples:
    def test_separable_sample(self):
        spec, rho = separable_sample(3, seed=2)
        assert len(spec.factors) == 3
        assert sum(spec.weights) == pytest.approx(1.0)
        assert np.allclose(spec.assemble(), rho.matrix)

    def test_separable_sample_is_reproducible(self):
        _, first = separable_sample(5, seed=9)
        _, second = separable_sample(5, seed=9)
        assert np.array_equal(first.matrix, second.matrix)

    def test_separable_sample_rejects_zero_terms(self):
        with pytest.raises(DomainError):
            separable_sample(0)

    def test_superpositive_sample(self, rng):
        phi = superpositive_sample(4, seed=3)
        assert is_separable_choi_sample(phi)
        x = random_matrix(rng)
        assert np.allclose(phi(x), map_of_choi(phi.choi)(x))

    def test_hakye_choi_is_not_separable(self):
        assert not is_separable_choi_sample(hakye.hakye_map(0.5))


class TestCompressionRankProfile:
    def test_conjugation_drops_to_rank_one(self, rng):
        a = np.outer(random_unit_vector(rng), random_unit_vector(rng).conj())
        profile = compression_rank_profile(choi_of_ad(a), samples=8, refinements=1)
        assert profile.second_factor <= 1e-9
        assert profile.first_factor <= 1e-9

    def test_hakye_stays_above_rank_one(self):
        profile = compression_rank_profile(hakye.choi_hakye(0.5), samples=16, refinements=2)
        assert profile.second_factor > 1e-3
        assert profile.first_factor > 1e-3
        assert set(profile.to_json()) == {"second_factor", "first_factor"}
