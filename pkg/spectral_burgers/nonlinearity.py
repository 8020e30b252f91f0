"""The Burgers nonlinearity F(v) = c1 v dv = (c1/2) d(v^2) on finite sine spans.

Products of sine series are cosine series:
    2 sin(j pi x) sin(k pi x) = cos((j - k) pi x) - cos((j + k) pi x)
and sum C_m cos(m pi x) differentiates into the e_m coefficient -C_m m pi / sqrt(2).
"""

import logging
import math
import time
from collections.abc import Sequence

import numpy as np
import scipy.fft
from scipy.integrate import trapezoid

from .config import CHECK_ABS_TOL, FAST_PATH_MIN_MODES, GROWTH_SAMPLES, QUADRATURE_POINTS, REFINEMENT_FACTOR
from .params import ModelParams
from .sampling import random_vector
from .spectral import SQRT2, evaluate, evaluate_derivative, hr_norm, pi_series_bound
from .types import CheckResult, ExtensionRatio, GrowthConstants, MonotonicityResult, SpectralVector

logger = logging.getLogger("sburgers.nonlinearity")

GROWTH_L2 = "growth_l2"
GROWTH_H_HALF = "growth_h_half"
LIPSCHITZ_H_HALF = "lipschitz_h_half"
GROWTH_MID = "growth_mid"

# alternate selector names accepted by growth_constant
GROWTH_ALIASES = {"item_i": "l2", "item_iii": "h_half"}


class NonlinearityError(ValueError):
    pass


# -- coefficient-space kernels --

def _product_cosines(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cosine coefficients C_0..C_{len(a)+len(b)} of (sum a_j e_j)(sum b_k e_k)."""
    a0 = np.concatenate(([0.0], a))
    b0 = np.concatenate(([0.0], b))
    out = np.zeros(len(a0) + len(b0) - 1)
    out -= np.convolve(a0, b0)
    lags = np.arange(len(a0) + len(b0) - 1) - (len(b0) - 1)
    np.add.at(out, np.abs(lags), np.correlate(a0, b0, mode="full"))
    return out


def _differentiate_cosines(c: np.ndarray) -> np.ndarray:
    """e_1.. coefficients of d/dx sum_{m>=0} C_m cos(m pi x)."""
    m = np.arange(1, len(c), dtype=np.float64)
    return -c[1:] * m * (math.pi / SQRT2)


def F_direct_coefficients(a: np.ndarray, params: ModelParams) -> np.ndarray:
    if len(a) == 0:
        return np.zeros(0)
    return 0.5 * params.c1 * _differentiate_cosines(_product_cosines(a, a))


def _transform_size(n: int) -> int:
    """Smallest power of two L >= 4n; the grid x_j = j/L has L+1 >= 4n+1 points."""
    return 1 << max(2, math.ceil(math.log2(4 * n)))


def F_fast_coefficients(a: np.ndarray, params: ModelParams) -> np.ndarray:
    n = len(a)
    if n == 0:
        return np.zeros(0)
    size = _transform_size(n)
    padded = np.zeros(size - 1)
    padded[:n] = a
    # DST-I gives 2 sum a_n sin(n pi j / L); the basis carries sqrt(2)
    interior = (SQRT2 / 2) * scipy.fft.dst(padded, type=1)
    squared = np.zeros(size + 1)
    squared[1:-1] = interior * interior
    cos_coefs = scipy.fft.dct(squared, type=1) / size
    cos_coefs[0] *= 0.5
    return 0.5 * params.c1 * _differentiate_cosines(cos_coefs[: 2 * n + 1])


def F_coefficients(a: np.ndarray, params: ModelParams) -> np.ndarray:
    """F on 2N modes, via transforms once N reaches FAST_PATH_MIN_MODES."""
    if len(a) >= FAST_PATH_MIN_MODES:
        return F_fast_coefficients(a, params)
    return F_direct_coefficients(a, params)


# -- public operations --

def eval_F_direct(v: SpectralVector, params: ModelParams) -> SpectralVector:
    return SpectralVector(F_direct_coefficients(v.coeffs, params))


def eval_F_fast(v: SpectralVector, params: ModelParams) -> SpectralVector:
    if len(v) < 1:
        raise NonlinearityError("fast path needs at least one mode")
    start = time.perf_counter()
    out = F_fast_coefficients(v.coeffs, params)
    logger.debug("fast F on %d modes (transform size %d) in %.3g ms",
                 len(v), _transform_size(len(v)), 1e3 * (time.perf_counter() - start))
    return SpectralVector(out)


def eval_F(v: SpectralVector, params: ModelParams) -> SpectralVector:
    return SpectralVector(F_coefficients(v.coeffs, params))


def eval_F_prime(v: SpectralVector, w: SpectralVector, params: ModelParams) -> SpectralVector:
    """F'(v)w = c1 (w dv + v dw) = c1 d(vw) on len(v) + len(w) modes."""
    if len(v) == 0 or len(w) == 0:
        return SpectralVector.zeros(len(v) + len(w))
    return SpectralVector(params.c1 * _differentiate_cosines(_product_cosines(v.coeffs, w.coeffs)))


def quadrature_coefficients(
    v: SpectralVector, params: ModelParams, n_modes: int, points: int = QUADRATURE_POINTS,
) -> np.ndarray:
    """<e_m, c1 v dv>_H for m = 1..n_modes by the composite trapezoid rule."""
    x = np.linspace(0.0, 1.0, points)
    integrand = params.c1 * evaluate(v, x) * evaluate_derivative(v, x)
    m = np.arange(1, n_modes + 1, dtype=np.float64)
    basis = SQRT2 * np.sin(np.outer(m, x) * math.pi)
    return trapezoid(basis * integrand, x, axis=1)


def energy_pairing(v: SpectralVector, params: ModelParams) -> float:
    """<v, F(v)>_H, which vanishes on every finite span."""
    return v.dot(eval_F_direct(v, params))


# -- constants --

def growth_constant(alpha: float, which: str, params: ModelParams) -> GrowthConstants:
    """Certified growth constant K, selected by which.

    "l2" (alias "item_i"): ||F(v)||_{H_-alpha} <= K ||v||_H^2, needs alpha > 3/4.
    "h_half" (alias "item_iii"): ||F(v)||_H <= K ||v||_{H_1/2}^2, alpha ignored.
    """
    which = GROWTH_ALIASES.get(which, which)
    if which == "l2":
        if alpha <= 0.75:
            raise NonlinearityError(f"the l2 growth bound needs alpha > 3/4, got {alpha}")
        series = pi_series_bound(4 * alpha - 2)
        k = abs(params.c1) * params.c0**-alpha * math.sqrt(0.5 * series.upper)
        return GrowthConstants(alpha=alpha, K=k, source=GROWTH_L2)
    if which == "h_half":
        return GrowthConstants(alpha=0.0, K=abs(params.c1) / (math.sqrt(3) * params.c0), source=GROWTH_H_HALF)
    raise NonlinearityError(f"unknown growth bound {which!r}")


def lipschitz_constant(params: ModelParams) -> GrowthConstants:
    return GrowthConstants(alpha=0.0, K=abs(params.c1) / (math.sqrt(3) * params.c0), source=LIPSCHITZ_H_HALF)


def embedding_bracket(params: ModelParams) -> float:
    """Certified sup ||u||_inf / ||u||_{H_1/2} + sup ||u||_{L4}^2 / ||u||_{H_1/2}^2."""
    return (3 * params.c0) ** -0.5 + 3**-0.5 / (params.c0 * math.pi)


def monotonicity_constant(params: ModelParams) -> float:
    """C* = c1^4 / (1024 c0^3), from ||u||_inf^2 <= ||u||_H ||du||_H and Young."""
    return params.c1**4 / (1024 * params.c0**3)


def estimate_growth_mid(
    alpha2: float,
    params: ModelParams,
    rng: np.random.Generator,
    n_samples: int = GROWTH_SAMPLES,
    max_modes: int = 128,
) -> GrowthConstants:
    """Sampled max of ||F(v)||_{H_-alpha2} / (1 + ||v||^2_{H_(1-alpha2)/3}). Not certified."""
    if not 0.25 < alpha2 < 0.5:
        raise NonlinearityError(f"alpha2 must lie in (1/4, 1/2), got {alpha2}")
    r = (1 - alpha2) / 3
    best = 0.0
    for _ in range(n_samples):
        n = int(rng.integers(1, max_modes + 1))
        v = random_vector(rng, n, decay=float(rng.uniform(0.0, 2.0)))
        v = v * (10.0 ** rng.uniform(-2, 2) / max(hr_norm(v, r, params), 1e-300))
        ratio = hr_norm(eval_F(v, params), -alpha2, params) / (1 + hr_norm(v, r, params) ** 2)
        best = max(best, ratio)
    logger.warning("middle growth constant is a sampled estimate: %.6g (alpha2=%g)", best, alpha2)
    return GrowthConstants(alpha=alpha2, K=best, source=GROWTH_MID, certified=False)


# -- inequality checkers --

def _check(name: str, lhs: float, rhs: float, scale: float) -> CheckResult:
    slack = rhs - lhs
    return CheckResult(name, slack >= -CHECK_ABS_TOL * max(1.0, scale), lhs, rhs, slack)


def _diff_norm(a: SpectralVector, b: SpectralVector, r: float, params: ModelParams) -> float:
    return hr_norm(a - b, r, params)


def lipschitz_check(v: SpectralVector, w: SpectralVector, params: ModelParams) -> CheckResult:
    k = lipschitz_constant(params).K
    lhs = _diff_norm(eval_F_direct(v, params), eval_F_direct(w, params), 0.0, params)
    rhs = k * (hr_norm(v, 0.5, params) + hr_norm(w, 0.5, params)) * _diff_norm(v, w, 0.5, params)
    return _check("lipschitz", lhs, rhs, rhs)


def growth_check(v: SpectralVector, constants: GrowthConstants, params: ModelParams) -> CheckResult:
    if constants.source == GROWTH_L2:
        lhs = hr_norm(eval_F_direct(v, params), -constants.alpha, params)
        rhs = constants.K * hr_norm(v, 0.0, params) ** 2
    elif constants.source == GROWTH_H_HALF:
        lhs = hr_norm(eval_F_direct(v, params), 0.0, params)
        rhs = constants.K * hr_norm(v, 0.5, params) ** 2
    else:
        raise NonlinearityError(f"no growth check for source {constants.source!r}")
    return _check(f"growth[{constants.source}]", lhs, rhs, rhs)


def coercivity_check(v: SpectralVector, w: SpectralVector, iota: float, params: ModelParams) -> CheckResult:
    """<v, F(v + w)>_H <= 3c1^2/(8c0) E^2 (||v||_H^2 + ||w||_iota^2) ||w||_iota^2 + ||v||_{H_1/2}^2."""
    if iota != 0.5:
        raise NonlinearityError(f"only iota = 1/2 has certified embedding constants, got {iota}")
    lhs = v.dot(eval_F_direct(v + w, params))
    w_sq = hr_norm(w, iota, params) ** 2
    bracket = embedding_bracket(params)
    rhs = (
        3 * params.c1**2 / (8 * params.c0) * bracket**2 * (hr_norm(v, 0.0, params) ** 2 + w_sq) * w_sq
        + hr_norm(v, 0.5, params) ** 2
    )
    return _check("coercivity", lhs, rhs, max(rhs, abs(lhs)))


def extension_lipschitz_check(
    v: SpectralVector,
    w: SpectralVector,
    params: ModelParams,
    gamma: float = 0.125,
    nu: float = 0.5,
) -> ExtensionRatio:
    """||F(v) - F(w)||_{H_-nu} / (||v - w||_gamma (1 + ||v||_gamma + ||w||_gamma))."""
    if not (0.125 <= gamma < 1 and 0.5 <= nu < 1):
        raise NonlinearityError(f"unsupported extension pair (gamma={gamma}, nu={nu})")
    denom = _diff_norm(v, w, gamma, params) * (1 + hr_norm(v, gamma, params) + hr_norm(w, gamma, params))
    if denom == 0.0:
        return ExtensionRatio(0.0, 0.0, 0.0)
    lhs = _diff_norm(eval_F(v, params), eval_F(w, params), -nu, params)
    return ExtensionRatio(lhs / denom, lhs, denom)


def derivative_remainder_check(v: SpectralVector, w: SpectralVector, params: ModelParams) -> CheckResult:
    """||F(v+w) - F(v) - F'(v)w||_H <= |c1|/(sqrt(3) c0) ||w||_{H_1/2}^2."""
    remainder = eval_F_direct(v + w, params) - eval_F_direct(v, params) - eval_F_prime(v, w, params)
    lhs = hr_norm(remainder, 0.0, params)
    rhs = lipschitz_constant(params).K * hr_norm(w, 0.5, params) ** 2
    return _check("derivative_remainder", lhs, rhs, rhs)


def monotonicity_check(
    v: SpectralVector, w: SpectralVector, eps: float, params: ModelParams,
) -> MonotonicityResult:
    """<F'(v)w, w> <= eps ||v||_1/2^2 ||w||^2 + (C/eps^2) ||w||^2 + ||w||_1/2^2 with C = C*."""
    if eps <= 0:
        raise NonlinearityError(f"eps must be positive, got {eps}")
    lhs = eval_F_prime(v, w, params).dot(w)
    x_sq = hr_norm(v, 0.5, params) ** 2
    y_sq = hr_norm(w, 0.5, params) ** 2
    z_sq = hr_norm(w, 0.0, params) ** 2
    c_star = monotonicity_constant(params)
    rhs = eps * x_sq * z_sq + c_star / eps**2 * z_sq + y_sq
    needed = 0.0
    if z_sq > 0:
        needed = max(0.0, eps**2 * (lhs - eps * x_sq * z_sq - y_sq) / z_sq)
    return MonotonicityResult(_check("monotonicity", lhs, rhs, max(rhs, abs(lhs))), c_star, needed)


def extension_lipschitz_refinement(
    params: ModelParams,
    rng: np.random.Generator,
    ladder: Sequence[int] = (16, 32, 64, 128),
    n_samples: int = 200,
    factor: float = REFINEMENT_FACTOR,
) -> CheckResult:
    """Sampled max of the extension ratio per span size; the finest max must stay below factor x the coarsest.

    Pairs fill all N modes with n^{-1/2} decay and log-uniform scales, so the
    ratio sees both the linear and the quadratic regime on every span.
    """
    if len(ladder) < 2:
        raise NonlinearityError(f"need at least two span sizes, got {list(ladder)}")
    maxima = []
    for n in ladder:
        best = 0.0
        for _ in range(n_samples):
            v, w = (random_vector(rng, n, decay=0.5, scale=10.0 ** rng.uniform(-1.5, 1.5)) for _ in range(2))
            best = max(best, extension_lipschitz_check(v, w, params).ratio)
        maxima.append(best)
    detail = ", ".join(f"N={n}: {m:.4g}" for n, m in zip(ladder, maxima))
    logger.info("extension ratio maxima %s", detail)
    result = _check("extension_refinement", maxima[-1], factor * maxima[0], factor * maxima[0])
    return CheckResult(result.name, result.passed, result.lhs, result.rhs, result.slack, detail)
