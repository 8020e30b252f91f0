import math

import mpmath
import numpy as np
import pytest

from spectral_burgers.params import ModelParams
from spectral_burgers.sampling import random_pair, random_vector
from spectral_burgers.spectral import (
    SQRT2, SpectralError, apply_semigroup, basis_constants, derivative_coefs, derivative_extension_check, dinf_bound,
    dinf_check, eigenvalue, eigenvalues, evaluate, evaluate_derivative, hr_norm, hr_norms,
    integration_by_parts_defect, linf_bound, linf_check, pi_series_bound, project, sampled_sup, semigroup_factors,
    sine_cosine_gram, zeta_bound,
)
from spectral_burgers.types import SpectralVector


def _params(**kw) -> ModelParams:
    return ModelParams(**kw)


class TestEigenvalues:
    def test_first_mode(self, params):
        assert eigenvalue(1, params) == pytest.approx(-math.pi**2)

    def test_scales_with_c0(self):
        assert eigenvalue(3, _params(c0=2.0)) == pytest.approx(-2 * 9 * math.pi**2)

    def test_array_matches_scalar(self, params):
        mu = eigenvalues(5, params)
        assert [eigenvalue(n, params) for n in range(1, 6)] == pytest.approx(mu.tolist())

    def test_zero_index_rejected(self, params):
        with pytest.raises(SpectralError, match="mode index"):
            eigenvalue(0, params)


class TestNorms:
    def test_basis_vector(self, params):
        v = SpectralVector.basis(3)
        assert hr_norm(v, 0.0, params) == 1.0
        assert hr_norm(v, 0.5, params) == pytest.approx(3 * math.pi)
        assert hr_norm(v, -1.0, params) == pytest.approx(1 / (9 * math.pi**2))

    def test_empty_and_zero(self, params):
        assert hr_norm(SpectralVector.zeros(0), 0.7, params) == 0.0
        assert hr_norm(SpectralVector.zeros(10), 0.7, params) == 0.0

    def test_rowwise_matches_single(self, params, rng):
        rows = rng.standard_normal((4, 12))
        expected = [hr_norm(SpectralVector(r), 0.3, params) for r in rows]
        assert hr_norms(rows, 0.3, params) == pytest.approx(expected, rel=1e-14)

    def test_monotone_in_index(self, params, rng):
        v = random_vector(rng, 20)
        norms = [hr_norm(v, r, params) for r in (-0.5, 0.0, 0.25, 0.5, 1.0)]
        assert norms == sorted(norms)

    def test_nonfinite_index_rejected(self, params):
        with pytest.raises(SpectralError, match="finite"):
            hr_norm(SpectralVector.basis(1), math.inf, params)


class TestSemigroup:
    def test_time_zero_is_identity(self, params, rng):
        v = random_vector(rng, 16)
        assert apply_semigroup(0.0, v, params) == v

    def test_composition(self, params, rng):
        v = random_vector(rng, 16)
        twice = apply_semigroup(0.05, apply_semigroup(0.02, v, params), params)
        once = apply_semigroup(0.07, v, params)
        assert np.allclose(twice.coeffs, once.coeffs, rtol=1e-13, atol=0.0)

    def test_underflow_flushes_to_zero(self, params):
        factors = semigroup_factors(1.0, 1000, params)
        assert factors[-1] == 0.0
        assert factors[0] == pytest.approx(math.exp(-math.pi**2))

    def test_negative_time_rejected(self, params):
        with pytest.raises(SpectralError, match=">= 0"):
            semigroup_factors(-1e-3, 4, params)

    @pytest.mark.parametrize("r", [-0.5, 0.0, 0.5, 1.0])
    def test_contraction(self, r, params, rng):
        v = random_vector(rng, 32, decay=0.5)
        for t in (1e-4, 1e-2, 1.0):
            assert hr_norm(apply_semigroup(t, v, params), r, params) <= hr_norm(v, r, params) * (1 + 1e-14)

    @pytest.mark.parametrize("s", [0.25, 0.5, 1.0])
    def test_smoothing(self, s, params, rng):
        # |mu|^s e^{-|mu| t} <= (s / (e t))^s for every mode
        v = random_vector(rng, 64)
        for t in (1e-3, 1e-2, 0.1):
            for r in (-0.5, 0.0, 0.5):
                lhs = hr_norm(apply_semigroup(t, v, params), r + s, params)
                assert lhs <= (s / (math.e * t)) ** s * hr_norm(v, r, params) * (1 + 1e-12)


class TestProjection:
    def test_exact_length(self):
        v = SpectralVector(np.arange(1.0, 9.0))
        assert len(project(v, 3)) == 3
        assert len(project(v, 12)) == 12
        assert project(v, 12) == v

    def test_contraction(self, params, rng):
        v = random_vector(rng, 40, decay=0.5)
        for n in (1, 7, 40, 64):
            for r in (-0.5, 0.0, 0.5, 1.0):
                assert hr_norm(project(v, n), r, params) <= hr_norm(v, r, params) * (1 + 1e-14)

    def test_negative_rejected(self):
        with pytest.raises(SpectralError):
            project(SpectralVector.basis(1), -1)


class TestEvaluation:
    def test_first_mode_sup(self):
        assert sampled_sup(SpectralVector.basis(1)) == pytest.approx(SQRT2, rel=1e-15)

    def test_point_values(self):
        v = SpectralVector([1.0, -2.0])
        x = np.array([0.25, 0.5])
        expected = SQRT2 * (np.sin(math.pi * x) - 2 * np.sin(2 * math.pi * x))
        assert evaluate(v, x) == pytest.approx(expected)

    def test_derivative_values(self):
        v = SpectralVector([0.0, 1.0])
        x = np.array([0.0, 0.3])
        assert evaluate_derivative(v, x) == pytest.approx(SQRT2 * 2 * math.pi * np.cos(2 * math.pi * x))

    def test_derivative_coefs_of_basis(self):
        assert derivative_coefs(SpectralVector.basis(3)) == pytest.approx([0.0, 0.0, 3 * math.pi])

    @pytest.mark.parametrize("c0", [1.0, 2.0])
    def test_derivative_norm_is_half_norm(self, c0, rng):
        params = _params(c0=c0)
        for _ in range(20):
            v = random_vector(rng, int(rng.integers(1, 50)), decay=float(rng.uniform(0, 2)))
            expected = hr_norm(v, 0.5, params) / math.sqrt(c0)
            assert float(np.linalg.norm(derivative_coefs(v))) == pytest.approx(expected, rel=1e-13)


class TestSeries:
    @pytest.mark.parametrize("s", [1.5, 2.0, 3.2, 4.0, 8.0])
    def test_encloses_zeta(self, s):
        bound = zeta_bound(s)
        exact = float(mpmath.zeta(s))
        slop = 1e-13 * max(1.0, exact)
        assert bound.lower - slop <= exact <= bound.upper + slop
        assert bound.gap < 1e-12

    def test_pi_series(self):
        bound = pi_series_bound(2.0)
        assert bound.value == pytest.approx(1 / 6, abs=1e-12)

    def test_divergent_rejected(self):
        with pytest.raises(SpectralError, match="exceed 1"):
            zeta_bound(1.0)


class TestBasisConstants:
    @pytest.mark.parametrize("rho", [0.5, 0.75, 1.0, 2.0])
    def test_bounds_hold(self, rho, params):
        bc = basis_constants(rho, params)
        assert bc.eig_sum <= bc.eig_sum_bound + 1e-12
        assert bc.deriv_ratio <= bc.deriv_ratio_bound * (1 + 1e-12)
        assert bc.basis_sup == SQRT2

    def test_half_is_one_sixth(self, params):
        assert basis_constants(0.5, params).eig_sum == pytest.approx(1 / 6, abs=1e-12)

    def test_scales_with_c0(self):
        bc = basis_constants(1.0, _params(c0=2.0))
        assert bc.eig_sum_bound == pytest.approx(0.25 / 6)

    def test_rho_below_half_rejected(self, params):
        with pytest.raises(SpectralError, match="1/2"):
            basis_constants(0.4, params)


class TestSupBounds:
    def test_linf_over_random(self, params, rng):
        for _ in range(50):
            v = random_vector(rng, int(rng.integers(1, 40)), decay=float(rng.uniform(0, 2)))
            assert linf_check(v, params).passed

    def test_linf_first_mode(self, params):
        v = SpectralVector.basis(1)
        assert linf_bound(v, params) == pytest.approx(math.pi / math.sqrt(3))

    def test_dinf_over_random(self, params, rng):
        for _ in range(50):
            v = random_vector(rng, int(rng.integers(1, 40)), decay=1.0)
            assert dinf_check(v, 0.5, params).passed

    def test_dinf_alpha_rejected(self, params):
        with pytest.raises(SpectralError, match="1/4"):
            dinf_bound(SpectralVector.basis(1), 0.25, params)


class TestWeakDerivative:
    def test_gram_entry(self):
        g = sine_cosine_gram(2, 2)
        assert g[0, 1] == pytest.approx(-4 / (3 * math.pi))
        assert g[0, 0] == 0.0
        assert g[1, 1] == 0.0

    def test_extension_bound(self, params, rng):
        for _ in range(20):
            v, _ = random_pair(rng, 24)
            assert derivative_extension_check(v, params).passed

    def test_integration_by_parts(self, rng):
        for _ in range(20):
            u, v = random_pair(rng, 24, decay=1.0)
            scale = 1 + np.linalg.norm(u.coeffs) * np.linalg.norm(v.coeffs) * 24**2 * 10
            assert integration_by_parts_defect(u, v) <= 1e-12 * scale
