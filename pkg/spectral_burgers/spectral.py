"""Sine eigenbasis of the Dirichlet Laplacian: norms, semigroup, projections, basis constants."""

import math

import numpy as np

from .config import (
    CHECK_ABS_TOL, DERIV_EXT_OVERSAMPLE, GRID_OVERSAMPLE, SAMPLED_SUP_REL_TOL,
    SERIES_MAX_TERMS, SERIES_MIN_TERMS, SERIES_TOL,
)
from .params import ModelParams
from .types import BasisConstants, CheckResult, SeriesBound, SpectralVector

SQRT2 = math.sqrt(2.0)


class SpectralError(ValueError):
    pass


def eigenvalue(n: int, params: ModelParams) -> float:
    if n < 1:
        raise SpectralError(f"mode index must be >= 1, got {n}")
    return -params.c0 * math.pi**2 * n * n


def eigenvalues(m: int, params: ModelParams) -> np.ndarray:
    """mu_1..mu_m as an array."""
    n = np.arange(1, m + 1, dtype=np.float64)
    return -params.c0 * math.pi**2 * n * n


def _weights(m: int, r: float, params: ModelParams) -> np.ndarray:
    return np.abs(eigenvalues(m, params)) ** r


def hr_norm(v: SpectralVector, r: float, params: ModelParams) -> float:
    """||v||_{H_r} = (sum |mu_n|^{2r} a_n^2)^{1/2}; r may be negative."""
    if not math.isfinite(r):
        raise SpectralError(f"Sobolev index must be finite, got {r}")
    if len(v) == 0:
        return 0.0
    if r == 0:
        return float(np.linalg.norm(v.coeffs))
    return float(np.linalg.norm(_weights(len(v), r, params) * v.coeffs))


def hr_norms(coeffs: np.ndarray, r: float, params: ModelParams) -> np.ndarray:
    """Row-wise H_r norms of a (times, modes) coefficient array."""
    if coeffs.shape[-1] == 0:
        return np.zeros(coeffs.shape[:-1])
    return np.linalg.norm(coeffs * _weights(coeffs.shape[-1], r, params), axis=-1)


def semigroup_factors(t: float, m: int, params: ModelParams) -> np.ndarray:
    if t < 0:
        raise SpectralError(f"semigroup time must be >= 0, got {t}")
    # underflow flushes to 0.0, which is the exact limit
    with np.errstate(under="ignore"):
        return np.exp(eigenvalues(m, params) * t)


def apply_semigroup(t: float, v: SpectralVector, params: ModelParams) -> SpectralVector:
    return SpectralVector(semigroup_factors(t, len(v), params) * v.coeffs)


def project(v: SpectralVector, n_keep: int) -> SpectralVector:
    """P_{I_n} v on exactly n_keep modes."""
    if n_keep < 0:
        raise SpectralError(f"n_keep must be >= 0, got {n_keep}")
    return SpectralVector(v.padded(n_keep))


def derivative_coefs(v: SpectralVector) -> np.ndarray:
    """Coefficients of dv in the system sqrt(2) cos(n pi x), n = 1..M."""
    n = np.arange(1, len(v) + 1, dtype=np.float64)
    return v.coeffs * n * math.pi


# -- physical-space evaluation --

def sample_grid(m: int) -> np.ndarray:
    """At least 4m+1 uniform interior points of (0, 1)."""
    k = GRID_OVERSAMPLE * max(m, 1) + 1
    return np.linspace(0.0, 1.0, k + 2)[1:-1]


def evaluate(v: SpectralVector, x: np.ndarray) -> np.ndarray:
    n = np.arange(1, len(v) + 1, dtype=np.float64)
    return SQRT2 * np.sin(np.outer(x, n) * math.pi) @ v.coeffs


def evaluate_derivative(v: SpectralVector, x: np.ndarray) -> np.ndarray:
    n = np.arange(1, len(v) + 1, dtype=np.float64)
    return SQRT2 * np.cos(np.outer(x, n) * math.pi) @ derivative_coefs(v)


def sampled_sup(v: SpectralVector, derivative: bool = False) -> float:
    """Grid sup of |v| or |dv|. A lower bound for the true sup, not certified."""
    if len(v) == 0:
        return 0.0
    x = sample_grid(len(v))
    values = evaluate_derivative(v, x) if derivative else evaluate(v, x)
    return float(np.max(np.abs(values)))


# -- certified series --

def zeta_bound(s: float, tol: float = SERIES_TOL) -> SeriesBound:
    """Enclose sum_{n>=1} n^{-s} for s > 1.

    Partial sum over n < N plus the Euler-Maclaurin tail from N through the
    f'(N) term. For f(x) = x^{-s} the remainder lies between zero and the next
    term f'''(N)/720, which is negative.
    """
    if not s > 1:
        raise SpectralError(f"series exponent must exceed 1, got {s}")
    next_coef = s * (s + 1) * (s + 2) / 720.0
    n_terms = math.ceil((next_coef / tol) ** (1.0 / (s + 3)))
    n_terms = min(max(n_terms, SERIES_MIN_TERMS), SERIES_MAX_TERMS)
    n = np.arange(n_terms - 1, 0, -1, dtype=np.float64)
    partial = float(np.sum(n**-s))
    big_n = float(n_terms)
    upper = partial + big_n ** (1 - s) / (s - 1) + 0.5 * big_n**-s + s * big_n ** (-s - 1) / 12
    lower = upper - next_coef * big_n ** (-s - 3)
    return SeriesBound(lower=lower, upper=upper, terms=n_terms)


def pi_series_bound(s: float, tol: float = SERIES_TOL) -> SeriesBound:
    """Enclose sum_{n>=1} (pi n)^{-s}."""
    z = zeta_bound(s, tol * math.pi**s)
    scale = math.pi**-s
    return SeriesBound(lower=z.lower * scale, upper=z.upper * scale, terms=z.terms)


# -- closed-form constants --

def basis_constants(rho: float, params: ModelParams) -> BasisConstants:
    if rho < 0.5:
        raise SpectralError(f"rho must be >= 1/2, got {rho}")
    series = pi_series_bound(4 * rho)
    eig_sum = params.c0 ** (-2 * rho) * series.value
    eig_sum_bound = params.c0 ** (-2 * rho) / 6
    # ||d e_n||_H |mu_n|^{-rho} = c0^{-rho} (pi n)^{1 - 2 rho}, largest at n = 1
    deriv_ratio = params.c0**-rho * math.pi ** (1 - 2 * rho)
    deriv_ratio_bound = params.c0**-rho
    if eig_sum > eig_sum_bound + SERIES_TOL or deriv_ratio > deriv_ratio_bound * (1 + CHECK_ABS_TOL):
        raise SpectralError(f"basis constant bound violated at rho = {rho}")
    return BasisConstants(
        rho=rho,
        eig_sum=eig_sum,
        eig_sum_bound=eig_sum_bound,
        deriv_ratio=deriv_ratio,
        deriv_ratio_bound=deriv_ratio_bound,
        basis_sup=SQRT2,
    )


def linf_bound(v: SpectralVector, params: ModelParams) -> float:
    return (3 * params.c0) ** -0.5 * hr_norm(v, 0.5, params)


def dinf_bound(v: SpectralVector, alpha: float, params: ModelParams) -> float:
    if alpha <= 0.25:
        raise SpectralError(f"alpha must exceed 1/4, got {alpha}")
    series = pi_series_bound(4 * alpha)
    return (
        SQRT2
        * params.c0 ** (-alpha - 0.5)
        * hr_norm(v, alpha + 0.5, params)
        * math.sqrt(series.upper)
    )


def _sup_check(name: str, sampled: float, bound: float) -> CheckResult:
    slack = bound - sampled
    passed = sampled <= bound * (1 + SAMPLED_SUP_REL_TOL) + CHECK_ABS_TOL
    return CheckResult(name, passed, sampled, bound, slack, detail="sampled sup")


def linf_check(v: SpectralVector, params: ModelParams) -> CheckResult:
    return _sup_check("linf", sampled_sup(v), linf_bound(v, params))


def dinf_check(v: SpectralVector, alpha: float, params: ModelParams) -> CheckResult:
    return _sup_check("dinf", sampled_sup(v, derivative=True), dinf_bound(v, alpha, params))


# -- weak derivative as a map H -> H_{-1/2} --

def sine_cosine_gram(m_sine: int, m_cos: int) -> np.ndarray:
    """G[m, k] = <e_m, sqrt(2) cos(k pi x)>_H = 2 m (1 - (-1)^(m+k)) / (pi (m^2 - k^2))."""
    m = np.arange(1, m_sine + 1, dtype=np.float64)[:, None]
    k = np.arange(1, m_cos + 1, dtype=np.float64)[None, :]
    odd = (m + k) % 2 == 1
    denom = np.where(odd, m * m - k * k, 1.0)
    return np.where(odd, 4 * m / (math.pi * denom), 0.0)


def derivative_sine_coefs(v: SpectralVector, m_sine: int) -> np.ndarray:
    """First m_sine sine coefficients of dv."""
    return sine_cosine_gram(m_sine, len(v)) @ derivative_coefs(v)


def derivative_extension_check(v: SpectralVector, params: ModelParams) -> CheckResult:
    """||dv||_{H_{-1/2}} <= |c0|^{-1/2} ||v||_H.

    The left side is truncated to DERIV_EXT_OVERSAMPLE * M sine modes, which
    only lowers it.
    """
    rhs = params.c0**-0.5 * hr_norm(v, 0.0, params)
    if len(v) == 0:
        return CheckResult("derivative_extension", True, 0.0, rhs, rhs)
    m = DERIV_EXT_OVERSAMPLE * len(v)
    lhs = hr_norm(SpectralVector(derivative_sine_coefs(v, m)), -0.5, params)
    slack = rhs - lhs
    return CheckResult("derivative_extension", slack >= -CHECK_ABS_TOL * max(1.0, rhs), lhs, rhs, slack)


def integration_by_parts_defect(u: SpectralVector, v: SpectralVector) -> float:
    """|<du, v>_H + <u, dv>_H|, zero up to rounding on finite spans."""
    if len(u) == 0 or len(v) == 0:
        return 0.0
    du_v = v.coeffs @ sine_cosine_gram(len(v), len(u)) @ derivative_coefs(u)
    u_dv = u.coeffs @ sine_cosine_gram(len(u), len(v)) @ derivative_coefs(v)
    return abs(float(du_v + u_dv))
