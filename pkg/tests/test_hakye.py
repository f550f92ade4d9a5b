"""Tests for the Ha-Kye maps, their Choi matrices and singular compressions."""

import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from mapcone import hakye
from mapcone.core import (
    DomainError,
    choi_of_map,
    compress_left,
    is_hermitian,
    matrix_unit,
    min_eigenvalue,
    numerical_rank,
    product_expectation,
    random_unit_vector,
)
from mapcone.hakye import Family

parameters = st.floats(min_value=0.0, max_value=0.99)
T_GRID = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9]


class TestCoefficients:
    def test_t_zero(self):
        p = hakye.coefficients(0.0)
        assert (p.a, p.b, p.c) == (1.0, 0.0, 1.0)

    def test_t_half(self):
        p = hakye.coefficients(0.5)
        assert p.a == pytest.approx(1 / 3)
        assert p.b == pytest.approx(1 / 3)
        assert p.c == pytest.approx(4 / 3)

    @given(parameters)
    def test_sum_is_two(self, t):
        p = hakye.coefficients(t)
        assert p.a + p.b + p.c == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("t", [-0.1, 1.0, 1.5, math.nan, math.inf])
    def test_out_of_range(self, t):
        with pytest.raises(DomainError):
            hakye.coefficients(t)

    def test_weights_are_circulant(self):
        w = hakye.coefficients(0.3).weights
        assert np.allclose(w[1], np.roll(w[0], 1))
        assert np.allclose(w[2], np.roll(w[0], 2))


class TestApplyHakye:
    def test_identity_is_scaled(self):
        assert np.allclose(hakye.apply_hakye(0.4, np.eye(3)), 2 * np.eye(3))

    def test_off_diagonal_sign(self):
        assert np.allclose(hakye.apply_hakye(0.4, matrix_unit(0, 1)), -matrix_unit(0, 1))

    def test_diagonal_unit(self):
        p = hakye.coefficients(0.4)
        image = hakye.apply_hakye(0.4, matrix_unit(0, 0))
        assert np.allclose(image, np.diag([p.a, p.c, p.b]))

    def test_map_at_zero(self, rng):
        x = rng.standard_normal((3, 3))
        expected = -x.astype(complex)
        expected[0, 0] = x[0, 0] + x[2, 2]
        expected[1, 1] = x[0, 0] + x[1, 1]
        expected[2, 2] = x[1, 1] + x[2, 2]
        assert np.allclose(hakye.apply_hakye(0.0, x), expected)

    def test_wrong_shape(self):
        with pytest.raises(DomainError):
            hakye.apply_hakye(0.4, np.eye(2))


class TestChoiHakye:
    def test_t_zero_diagonal(self):
        choi = hakye.choi_hakye(0.0)
        assert np.allclose(np.diag(choi), [1, 1, 0, 0, 1, 1, 1, 0, 1])

    def test_minus_one_entries(self):
        choi = hakye.choi_hakye(0.6)
        positions = [0, 4, 8]
        for p in positions:
            for q in positions:
                if p != q:
                    assert choi[p, q] == -1.0
        off = choi - np.diag(np.diag(choi))
        assert np.count_nonzero(off) == 6

    @given(parameters)
    @settings(max_examples=30, deadline=None)
    def test_closed_form_matches_evaluator(self, t):
        closed = hakye.choi_hakye(t)
        evaluated = choi_of_map(lambda x: hakye.apply_hakye(t, x))
        assert np.allclose(closed, evaluated, atol=1e-12)
        assert np.trace(closed).real == pytest.approx(6.0)
        assert is_hermitian(closed)

    @pytest.mark.parametrize("t", T_GRID)
    def test_not_completely_positive(self, t):
        a = hakye.coefficients(t).a
        assert min_eigenvalue(hakye.choi_hakye(t)) == pytest.approx(a - 2.0)
        assert a - 2.0 < 0

    def test_map_carries_closed_form_choi(self):
        assert np.allclose(hakye.hakye_map(0.3).choi, hakye.choi_hakye(0.3))


class TestCompression:
    @given(parameters, st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_closed_form_matches_choi(self, t, seed):
        y = random_unit_vector(np.random.default_rng(seed))
        assert np.allclose(hakye.compression(t, y), compress_left(hakye.choi_hakye(t), y), atol=1e-12)

    def test_quadratic_form_is_product_expectation(self, rng):
        y, x = random_unit_vector(rng), random_unit_vector(rng)
        value = np.vdot(x, hakye.compression(0.4, y) @ x).real
        assert value == pytest.approx(product_expectation(hakye.choi_hakye(0.4), y, x))


class TestDeterminantCubic:
    @pytest.mark.parametrize("t", T_GRID)
    def test_determinant_equals_cubic(self, t, rng):
        for _ in range(20):
            y = random_unit_vector(rng)
            assert hakye.F_det(t, y) == pytest.approx(hakye.F_poly(t, *(np.abs(y) ** 2)), abs=1e-12)

    def test_d_constant(self):
        for t in T_GRID:
            p = hakye.coefficients(t)
            expected = p.a**3 + p.b**3 + p.c**3 + 3 * p.a * p.b * p.c - 3 * p.a - 2
            assert hakye.F_constants(t).D == pytest.approx(expected)

    def test_constants_at_zero(self):
        k = hakye.F_constants(0.0)
        assert k.A == 0.0
        assert k.diagonal_sum == pytest.approx(1.0)

    @pytest.mark.parametrize("t", T_GRID)
    def test_diagonal_sum_closed_form(self, t):
        assert hakye.F_constants(t).diagonal_sum == pytest.approx(hakye.diagonal_sum_closed_form(t))

    @pytest.mark.parametrize("t", T_GRID)
    def test_sums_cancel(self, t):
        k = hakye.F_constants(t)
        assert k.diagonal_sum + k.cross_sum == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("t", T_GRID)
    def test_gradient_vanishes_at_equal_moduli(self, t):
        third = 1 / 3
        assert np.allclose(hakye.F_gradient(t, third, third, third), 0.0, atol=1e-12)

    def test_gradient_matches_finite_differences(self, rng):
        t = 0.35
        point = rng.dirichlet(np.ones(3))
        h = 1e-6
        analytic = hakye.F_gradient(t, *point)
        for i in range(3):
            forward, backward = point.copy(), point.copy()
            forward[i] += h
            backward[i] -= h
            numeric = (hakye.F_poly(t, *forward) - hakye.F_poly(t, *backward)) / (2 * h)
            assert numeric == pytest.approx(analytic[i], rel=1e-6, abs=1e-9)

    def test_summed_gradient_is_quadratic(self, rng):
        t = 0.6
        point = rng.dirichlet(np.ones(3))
        total = hakye.F_gradient(t, *point).sum()
        assert total == pytest.approx(hakye.gradient_sum_quadratic(t, *point))

    def test_poly_broadcasts(self):
        grid = hakye.moduli_grid(10)
        values = hakye.F_poly(0.5, grid[:, 0], grid[:, 1], grid[:, 2])
        assert values.shape == (len(grid),)

    @pytest.mark.parametrize("t", T_GRID)
    def test_cubic_nonnegative_on_simplex(self, t):
        grid = hakye.moduli_grid(60)
        values = hakye.F_poly(t, grid[:, 0], grid[:, 1], grid[:, 2])
        assert values.min() >= -1e-12


class TestZeroFaceRatios:
    @pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
    def test_double_root_at_inverse_t(self, t):
        ratios = hakye.zero_face_ratios(t)
        assert len(ratios) >= 1
        assert np.allclose(ratios, 1 / t, rtol=1e-6)

    def test_no_ratio_at_zero(self):
        assert hakye.zero_face_ratios(0.0).size == 0


class TestSingularFamilies:
    def test_four_families(self):
        families = hakye.singular_y_families(0.5)
        assert [f.family_id for f in families] == list(Family)

    def test_moduli(self):
        t = 0.5
        s, r = math.sqrt(t / (1 + t)), math.sqrt(1 / (1 + t))
        moduli = {f.family_id: f.moduli for f in hakye.singular_y_families(t)}
        assert np.allclose(moduli[Family.EQUAL_MODULI], [1 / math.sqrt(3)] * 3)
        assert np.allclose(moduli[Family.ZERO_1], [0, s, r])
        assert np.allclose(moduli[Family.ZERO_2], [r, 0, s])
        assert np.allclose(moduli[Family.ZERO_3], [s, r, 0])

    def test_degenerate_at_zero(self):
        moduli = [f.moduli for f in hakye.singular_y_families(0.0)[1:]]
        assert np.allclose(moduli, [[0, 0, 1], [1, 0, 0], [0, 1, 0]])

    def test_unit_norm(self):
        for t in T_GRID:
            for f in hakye.singular_y_families(t):
                assert np.linalg.norm(f.moduli) == pytest.approx(1.0)
                assert np.linalg.norm(f.kernel_moduli) == pytest.approx(1.0)

    def test_zero_index(self):
        assert Family.EQUAL_MODULI.zero_index is None
        assert Family.ZERO_2.zero_index == 1
        assert Family.with_zero_at(2) is Family.ZERO_3

    def test_family_lookup(self):
        assert hakye.family(0.3, "ZERO_2").family_id is Family.ZERO_2
        with pytest.raises(ValueError, match="ZERO_4"):
            hakye.family(0.3, "ZERO_4")

    @pytest.mark.parametrize("t", T_GRID)
    def test_determinant_vanishes(self, t, rng):
        for f in hakye.singular_y_families(t):
            for _ in range(10):
                y = f.vector(rng.uniform(0, 2 * np.pi, 3))
                assert abs(hakye.F_det(t, y)) <= 1e-10

    @pytest.mark.parametrize("t", T_GRID)
    def test_compression_has_rank_two(self, t, rng):
        for f in hakye.singular_y_families(t):
            y = f.vector(rng.uniform(0, 2 * np.pi, 3))
            assert numerical_rank(hakye.compression(t, y)) == 2

    def test_rank_floor_on_random_vectors(self, rng):
        choi = hakye.choi_hakye(0.4)
        for _ in range(50):
            v = random_unit_vector(rng)
            assert numerical_rank(compress_left(choi, v)) >= 2


class TestKernel:
    @pytest.mark.parametrize("t", T_GRID)
    def test_kernel_vector(self, t, rng):
        for f in hakye.singular_y_families(t):
            phases = rng.uniform(0, 2 * np.pi, 3)
            y = f.vector(phases)
            x = hakye.kernel_x(t, f, phases)
            compression = hakye.compression(t, y)
            assert np.linalg.norm(compression @ x) <= 1e-9
            assert abs(product_expectation(hakye.choi_hakye(t), y, x)) <= 1e-9

    def test_kernel_spans_null_space(self, rng):
        t = 0.3
        for f in hakye.singular_y_families(t):
            phases = rng.uniform(0, 2 * np.pi, 3)
            null = scipy.linalg.null_space(hakye.compression(t, f.vector(phases)), rcond=1e-9)
            assert null.shape[1] == 1
            x = hakye.kernel_x(t, f, phases)
            assert abs(abs(np.vdot(null[:, 0], x)) - 1.0) <= 1e-9

    def test_equal_moduli_kernel_is_conjugate(self):
        f = hakye.family(0.5, Family.EQUAL_MODULI)
        phases = np.array([0.3, 1.1, -2.0])
        assert np.allclose(hakye.kernel_x(0.5, f, phases), f.vector(phases).conj())

    def test_family_of_other_t_rejected(self):
        f = hakye.family(0.3, Family.ZERO_1)
        with pytest.raises(DomainError):
            hakye.kernel_x(0.4, f, (0, 0, 0))

    def test_phases_shape(self):
        f = hakye.family(0.3, Family.ZERO_1)
        with pytest.raises(DomainError):
            f.vector((0.0, 1.0))


class TestPermutationSymmetry:
    @pytest.mark.parametrize("t", [0.0, 0.7])
    def test_invariant(self, t):
        assert hakye.permutation_symmetry_check(t)

    def test_perturbation_breaks_symmetry(self):
        choi = hakye.choi_hakye(0.5).copy()
        choi[1, 1] += 0.1
        assert not hakye.permutation_symmetry_check(0.5, choi)

    def test_cycle_permutes_families(self):
        t = 0.4
        p = hakye.cyclic_permutation_matrix()
        zero_1 = hakye.family(t, Family.ZERO_1).vector()
        image = p @ zero_1
        assert abs(hakye.F_det(t, image)) <= 1e-10
        assert np.allclose(np.abs(image), hakye.family(t, Family.ZERO_2).moduli)


class TestModuliGrid:
    def test_points_on_simplex(self):
        grid = hakye.moduli_grid(12)
        assert len(grid) == 13 * 14 // 2
        assert np.allclose(grid.sum(axis=1), 1.0)
        assert grid.min() >= 0

    def test_distance_to_families(self):
        t = 0.5
        on_family = np.array(hakye.family(t, Family.ZERO_3).moduli) ** 2
        assert hakye.distance_to_families(t, on_family)[0] == pytest.approx(0.0, abs=1e-15)
        assert hakye.distance_to_families(t, [1.0, 0.0, 0.0])[0] > 0.1
