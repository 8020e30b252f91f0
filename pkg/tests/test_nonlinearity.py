import logging
import math

import mpmath
import numpy as np
import pytest

from spectral_burgers.nonlinearity import (
    GROWTH_H_HALF, GROWTH_L2, GROWTH_MID, NonlinearityError, F_coefficients, F_direct_coefficients,
    coercivity_check, derivative_remainder_check, embedding_bracket, energy_pairing, estimate_growth_mid,
    eval_F, eval_F_direct, eval_F_fast, eval_F_prime, extension_lipschitz_check, extension_lipschitz_refinement,
    growth_check, growth_constant, lipschitz_check, lipschitz_constant, monotonicity_check, monotonicity_constant,
    quadrature_coefficients,
)
from spectral_burgers.params import ModelParams
from spectral_burgers.sampling import random_pair, random_vector
from spectral_burgers.spectral import hr_norm
from spectral_burgers.types import SpectralVector


def _unit(**kw) -> ModelParams:
    return ModelParams(**({"c0": 1.0, "c1": 1.0} | kw))


def _rel(a: SpectralVector, b: SpectralVector, params: ModelParams) -> float:
    return hr_norm(a - b, 0.0, params) / max(hr_norm(b, 0.0, params), 1e-300)


class TestEvalF:
    def test_first_mode(self, params):
        # v = e_1: (c1/2) d(v^2) = c1 pi sin(2 pi x) = (c1 pi / sqrt 2) e_2
        out = eval_F_direct(SpectralVector.basis(1), params)
        assert len(out) == 2
        assert out.coeffs == pytest.approx([0.0, params.c1 * math.pi / math.sqrt(2)], abs=1e-15)

    def test_output_length_doubles(self, params, rng):
        assert len(eval_F_direct(random_vector(rng, 7), params)) == 14

    def test_empty_input(self, params):
        assert len(eval_F_direct(SpectralVector.zeros(0), params)) == 0

    def test_quadratic_scaling(self, params, rng):
        v = random_vector(rng, 10)
        assert _rel(eval_F_direct(3.0 * v, params), 9.0 * eval_F_direct(v, params), params) < 1e-14

    def test_linear_in_c1(self, rng):
        v = random_vector(rng, 10)
        a = eval_F_direct(v, _unit(c1=2.0))
        b = eval_F_direct(v, _unit(c1=1.0))
        assert _rel(a, 2.0 * b, _unit()) < 1e-14

    def test_zero_c1_vanishes(self, rng):
        v = random_vector(rng, 10)
        assert hr_norm(eval_F_direct(v, _unit(c1=0.0)), 0.0, _unit()) == 0.0

    def test_matches_quadrature(self, params, rng):
        for _ in range(20):
            v = random_vector(rng, int(rng.integers(1, 13)), decay=1.0)
            quad = quadrature_coefficients(v, params, 2 * len(v))
            assert quad == pytest.approx(eval_F_direct(v, params).coeffs, abs=1e-8)


class TestFastPath:
    @pytest.mark.parametrize("n", [1, 5, 33, 70, 128])
    def test_matches_direct(self, n, params, rng):
        v = random_vector(rng, n, decay=0.5)
        fast = eval_F_fast(v, params)
        direct = eval_F_direct(v, params)
        assert len(fast) == len(direct) == 2 * n
        assert _rel(fast, direct, params) < 1e-10

    def test_dispatch_switches(self, params, rng):
        small = random_vector(rng, 8).coeffs
        assert np.array_equal(F_coefficients(small, params), F_direct_coefficients(small, params))
        big = random_vector(rng, 64)
        assert len(eval_F(big, params)) == 128

    def test_empty_rejected(self, params):
        with pytest.raises(NonlinearityError, match="at least one mode"):
            eval_F_fast(SpectralVector.zeros(0), params)

    def test_logs_timing(self, params, rng, caplog):
        with caplog.at_level(logging.DEBUG, logger="sburgers.nonlinearity"):
            eval_F_fast(random_vector(rng, 70), params)
        assert "fast F on 70 modes (transform size 512)" in caplog.text

    @pytest.mark.slow
    def test_matches_direct_over_many_draws(self, params, rng):
        for _ in range(1000):
            v = random_vector(rng, int(rng.integers(1, 257)), decay=float(rng.uniform(0, 2)))
            assert _rel(eval_F_fast(v, params), eval_F_direct(v, params), params) < 1e-10


class TestDerivative:
    def test_diagonal_is_twice_F(self, params, rng):
        v = random_vector(rng, 12)
        assert _rel(eval_F_prime(v, v, params), 2.0 * eval_F_direct(v, params), params) < 1e-13

    def test_bilinear_symmetry(self, params, rng):
        v, w = random_vector(rng, 9), random_vector(rng, 5)
        assert _rel(eval_F_prime(v, w, params), eval_F_prime(w, v, params), params) < 1e-13

    def test_output_length(self, params, rng):
        assert len(eval_F_prime(random_vector(rng, 9), random_vector(rng, 5), params)) == 14

    def test_matches_central_difference(self, params, rng):
        # F is quadratic, so the central difference is exact up to rounding
        h = 1e-3
        for _ in range(20):
            n = int(rng.integers(1, 33))
            v, w = random_vector(rng, n, decay=0.5), random_vector(rng, n, decay=0.5)
            fd = (eval_F_direct(v + h * w, params) - eval_F_direct(v - h * w, params)) * (0.5 / h)
            assert _rel(fd, eval_F_prime(v, w, params), params) < 1e-8

    def test_remainder_bound(self, params, rng):
        for _ in range(50):
            v, w = random_pair(rng, 32)
            assert derivative_remainder_check(v, w, params).passed


class TestEnergy:
    def test_pairing_vanishes(self, params, rng):
        for _ in range(200):
            v = random_vector(rng, int(rng.integers(1, 129)), decay=1.0)
            assert abs(energy_pairing(v, params)) <= 1e-10 * (1 + hr_norm(v, 0.0, params) ** 3)


class TestGrowthConstants:
    def test_l2_at_one(self):
        assert growth_constant(1.0, "l2", _unit()).K == pytest.approx(math.sqrt(1 / 12), abs=1e-12)

    def test_l2_against_mpmath(self):
        alpha = 0.9
        exact = math.sqrt(0.5 * float(mpmath.zeta(4 * alpha - 2)) * math.pi ** (2 - 4 * alpha))
        got = growth_constant(alpha, "l2", _unit())
        assert got.K == pytest.approx(exact, rel=1e-10)
        assert got.source == GROWTH_L2 and got.certified

    def test_h_half_regression(self):
        got = growth_constant(0.0, "h_half", _unit())
        assert got.K == pytest.approx(0.5773502691896258, abs=1e-12)
        assert got.source == GROWTH_H_HALF

    def test_scales_with_coefficients(self):
        k1 = growth_constant(0.0, "h_half", _unit()).K
        assert growth_constant(0.0, "h_half", _unit(c0=2.0, c1=-3.0)).K == pytest.approx(1.5 * k1)

    def test_l2_alpha_window(self):
        with pytest.raises(NonlinearityError, match="alpha > 3/4"):
            growth_constant(0.75, "l2", _unit())

    def test_unknown_bound(self):
        with pytest.raises(NonlinearityError, match="unknown growth bound"):
            growth_constant(1.0, "middle", _unit())

    def test_selector_aliases(self, params):
        assert growth_constant(0.9, "item_i", params) == growth_constant(0.9, "l2", params)
        assert growth_constant(0.0, "item_iii", params) == growth_constant(0.0, "h_half", params)
        with pytest.raises(NonlinearityError, match="alpha > 3/4"):
            growth_constant(0.5, "item_i", params)

    def test_lipschitz_matches_h_half(self, params):
        assert lipschitz_constant(params).K == growth_constant(0.0, "h_half", params).K

    def test_checks_pass(self, params, rng):
        constants = (growth_constant(0.8, "l2", params), growth_constant(1.0, "l2", params),
                     growth_constant(0.0, "h_half", params))
        for _ in range(100):
            v = random_vector(rng, int(rng.integers(1, 64)), decay=float(rng.uniform(0, 2)))
            for k in constants:
                assert growth_check(v, k, params).passed

    def test_corrupted_constant_fails(self, params):
        # e_1 reaches about 40% of the H_1/2 -> H bound
        k = growth_constant(0.0, "h_half", params)
        corrupted = type(k)(k.alpha, 0.3 * k.K, k.source)
        v = SpectralVector.basis(1)
        assert growth_check(v, k, params).passed
        assert not growth_check(v, corrupted, params).passed

    def test_estimate_is_tagged(self, params, rng, caplog):
        with caplog.at_level(logging.WARNING, logger="sburgers.nonlinearity"):
            est = estimate_growth_mid(0.3, params, rng, n_samples=200, max_modes=32)
        assert not est.certified
        assert est.source == GROWTH_MID
        assert 0 < est.K < math.inf
        assert "sampled estimate" in caplog.text

    def test_estimate_window(self, params, rng):
        with pytest.raises(NonlinearityError, match="alpha2"):
            estimate_growth_mid(0.5, params, rng)


class TestInequalities:
    def test_lipschitz(self, params, rng):
        for _ in range(100):
            v, w = random_pair(rng, 48, decay=0.5)
            assert lipschitz_check(v, w, params).passed

    def test_lipschitz_same_point(self, params, rng):
        v = random_vector(rng, 8)
        result = lipschitz_check(v, v, params)
        assert result.passed and result.lhs == 0.0

    def test_coercivity(self, params, rng):
        for _ in range(100):
            v, w = random_pair(rng, 48, decay=0.5)
            assert coercivity_check(v, w, 0.5, params).passed

    def test_coercivity_iota_restricted(self, params, rng):
        v, w = random_pair(rng, 8)
        with pytest.raises(NonlinearityError, match="iota"):
            coercivity_check(v, w, 0.4, params)

    def test_embedding_bracket(self):
        assert embedding_bracket(_unit()) == pytest.approx(3**-0.5 + 3**-0.5 / math.pi)

    def test_monotonicity(self, params, rng):
        assert monotonicity_constant(params) == pytest.approx(1 / 1024)
        for _ in range(100):
            v, w = random_pair(rng, 48, decay=0.5)
            result = monotonicity_check(v, w, 0.5, params)
            assert result.check.passed
            assert result.empirical_constant <= result.constant + 1e-12

    def test_monotonicity_eps_positive(self, params, rng):
        v, w = random_pair(rng, 8)
        with pytest.raises(NonlinearityError, match="eps"):
            monotonicity_check(v, w, 0.0, params)


class TestExtensionLipschitz:
    def test_equal_inputs(self, params, rng):
        v = random_vector(rng, 16)
        assert extension_lipschitz_check(v, v, params).ratio == 0.0

    def test_ratio_finite(self, params, rng):
        for _ in range(50):
            v, w = random_pair(rng, 64, decay=0.5)
            r = extension_lipschitz_check(v, w, params)
            assert math.isfinite(r.ratio) and r.ratio >= 0

    def test_stronger_source_weaker_target(self, params, rng):
        v, w = random_pair(rng, 32, decay=0.5)
        base = extension_lipschitz_check(v, w, params)
        other = extension_lipschitz_check(v, w, params, gamma=0.5, nu=0.75)
        assert other.ratio <= base.ratio

    def test_unsupported_pair(self, params, rng):
        v, w = random_pair(rng, 8)
        with pytest.raises(NonlinearityError, match="unsupported"):
            extension_lipschitz_check(v, w, params, gamma=0.1)

    def test_refinement_stays_bounded(self, params, rng):
        result = extension_lipschitz_refinement(params, rng)
        assert result.passed
        assert result.rhs > 0
        assert "N=16" in result.detail and "N=128" in result.detail

    def test_refinement_tight_factor_fails(self, params, rng):
        result = extension_lipschitz_refinement(params, rng, ladder=(16, 64), n_samples=50, factor=0.1)
        assert not result.passed

    def test_refinement_needs_two_levels(self, params, rng):
        with pytest.raises(NonlinearityError, match="two span sizes"):
            extension_lipschitz_refinement(params, rng, ladder=(16,))
