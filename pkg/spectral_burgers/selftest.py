"""Deterministic invariant suite behind `sburgers selftest`. Hermetic and fast."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterator

import numpy as np
from scipy.integrate import trapezoid

from .bounds import bootstrap_rho_bound, bootstrap_top_bound, gronwall_bound
from .experiments import failing_reports, sample_path, solver_config
from .noise import NoiseSpec, sample_convolution, uniform_grid
from .nonlinearity import (
    F_direct_coefficients, F_fast_coefficients, coercivity_check, derivative_remainder_check, energy_pairing,
    extension_lipschitz_refinement, growth_check, growth_constant, lipschitz_check, monotonicity_check,
)
from .params import ModelParams, RunConfig
from .sampling import random_pair, random_vector
from .solver import SolverConfig, solve
from .spectral import (
    apply_semigroup, basis_constants, derivative_extension_check, dinf_check, evaluate, hr_norm,
    integration_by_parts_defect, linf_check, project,
)
from .types import CheckResult, SpectralVector

logger = logging.getLogger("sburgers.selftest")

SELFTEST_SEED = 7
CANNED_PATHS = 10
REGRESSION_TOL = 1e-11

# frozen regression values for c0 = c1 = 1
K_H_HALF = 0.5773502691896258
K_L2_ALPHA1 = math.sqrt(1 / 12)


def _close(name: str, value: float, expected: float, tol: float) -> CheckResult:
    diff = abs(value - expected)
    return CheckResult(name, diff <= tol * max(1.0, abs(expected)), value, expected, tol - diff)


def _all(name: str, results: list[CheckResult]) -> CheckResult:
    """Collapse a batch into its worst member."""
    worst = min(results, key=lambda r: (r.passed, r.slack))
    failed = sum(not r.passed for r in results)
    return CheckResult(name, failed == 0, worst.lhs, worst.rhs, worst.slack, f"{failed}/{len(results)} failed")


def _spectral(rng: np.random.Generator, params: ModelParams) -> Iterator[CheckResult]:
    v = random_vector(rng, 24, decay=1.0)
    x = np.linspace(0.0, 1.0, 4 * len(v) + 1)
    energy = float(trapezoid(evaluate(v, x) ** 2, x))
    yield _close("parseval", energy, hr_norm(v, 0.0, params) ** 2, 1e-12)

    twice = apply_semigroup(0.02, apply_semigroup(0.01, v, params), params)
    once = apply_semigroup(0.03, v, params)
    yield _close("semigroup", hr_norm(twice - once, 0.0, params), 0.0, 1e-14)

    yield _all("contraction", [
        CheckResult("contraction", hr_norm(project(v, n), r, params) <= hr_norm(v, r, params) * (1 + 1e-14),
                    hr_norm(project(v, n), r, params), hr_norm(v, r, params),
                    hr_norm(v, r, params) - hr_norm(project(v, n), r, params))
        for n in (1, 5, 12, 30) for r in (-0.5, 0.0, 0.5, 1.0)
    ])
    for rho in (0.5, 0.75, 1.0, 2.0):
        bc = basis_constants(rho, params)
        yield CheckResult(f"basis_constants[{rho}]", True, bc.eig_sum, bc.eig_sum_bound, bc.eig_sum_bound - bc.eig_sum)
    yield _close("eig_sum[1/2]", basis_constants(0.5, params).eig_sum, 1 / 6, 1e-12)

    pairs = [random_pair(rng, 32, decay=1.0) for _ in range(20)]
    yield _all("linf", [linf_check(a, params) for a, _ in pairs])
    yield _all("dinf", [dinf_check(a, 0.5, params) for a, _ in pairs])
    yield _all("derivative_extension", [derivative_extension_check(a, params) for a, _ in pairs])
    defects = [integration_by_parts_defect(a, b) / (1 + hr_norm(a, 0.5, params) * hr_norm(b, 0.5, params))
               for a, b in pairs]
    yield _close("integration_by_parts", max(defects), 0.0, 1e-10)


def _nonlinearity(rng: np.random.Generator, params: ModelParams) -> Iterator[CheckResult]:
    unit = ModelParams(c0=1.0, c1=1.0)
    yield _close("K_h_half", growth_constant(0.0, "h_half", unit).K, K_H_HALF, REGRESSION_TOL)
    yield _close("K_l2[alpha=1]", growth_constant(1.0, "l2", unit).K, K_L2_ALPHA1, REGRESSION_TOL)

    pairs = [random_pair(rng, 48, decay=0.5) for _ in range(40)]
    energies = [abs(energy_pairing(a, params)) / (1 + hr_norm(a, 0.0, params) ** 3) for a, _ in pairs]
    yield _close("energy_identity", max(energies), 0.0, 1e-10)

    a = random_vector(rng, 80, decay=1.0)
    direct = SpectralVector(F_direct_coefficients(a.coeffs, params))
    fast = SpectralVector(F_fast_coefficients(a.coeffs, params))
    rel = hr_norm(direct - fast, 0.0, params) / max(hr_norm(direct, 0.0, params), 1e-300)
    yield _close("fast_path", rel, 0.0, 1e-10)

    l2 = growth_constant(1.0, "l2", params)
    h_half = growth_constant(0.0, "h_half", params)
    yield _all("growth", [growth_check(v, k, params) for v, _ in pairs for k in (l2, h_half)])
    yield _all("lipschitz", [lipschitz_check(v, w, params) for v, w in pairs])
    yield _all("derivative_remainder", [derivative_remainder_check(v, w, params) for v, w in pairs])
    yield _all("coercivity", [coercivity_check(v, w, 0.5, params) for v, w in pairs])
    yield _all("monotonicity", [monotonicity_check(v, w, 0.5, params).check for v, w in pairs])
    yield extension_lipschitz_refinement(params, rng)


def _solver(params: ModelParams) -> Iterator[CheckResult]:
    linear = params.model_copy(update={"c1": 0.0})
    xi = SpectralVector(1.0 / np.arange(1, 17, dtype=np.float64) ** 2)
    spec = NoiseSpec.power_law(linear.beta, 16, linear)
    config = SolverConfig(16, 64, linear, spec, xi)
    noise = sample_convolution(spec, uniform_grid(linear.T, 64), SELFTEST_SEED, linear)
    traj = solve(config, noise)
    worst = max(
        hr_norm(traj.state(k) - apply_semigroup(float(t), xi, linear) - noise.at(k, 16), 0.0, linear)
        for k, t in enumerate(traj.times)
    )
    yield _close("linear_exactness", worst, 0.0, 1e-12)


def _bounds(params: ModelParams) -> Iterator[CheckResult]:
    run = RunConfig.model_validate({
        "experiment": "check-bounds",
        "model": params.model_dump(),
        "noise": {"m_noise": 16},
        "solver": {"n_modes": 16, "n_steps": 256},
        "ladder": [],
        "paths": CANNED_PATHS,
        "seed": SELFTEST_SEED,
    })
    sc = solver_config(run, 16)
    reports = []
    for i in range(CANNED_PATHS):
        noise = sample_path(run, i, sc.spec)
        traj = solve(sc, noise)
        reports += [
            gronwall_bound(traj, noise, sc),
            bootstrap_rho_bound(traj, noise, sc, run.bounds.rho, run.bounds.alpha1),
            bootstrap_top_bound(traj, noise, sc, run.bounds.kappa),
        ]
    failed = {id(r) for r in failing_reports(reports)}
    yield _all("bounds", [CheckResult(r.bound_name, id(r) not in failed, r.lhs, r.rhs, r.slack) for r in reports])


def _guarded(name: str, suite: Callable[[], Iterator[CheckResult]]) -> list[CheckResult]:
    try:
        return list(suite())
    except Exception as e:
        logger.exception("selftest suite %s raised", name)
        return [CheckResult(name, False, math.nan, math.nan, math.nan, f"{type(e).__name__}: {e}")]


def run_selftest(params: ModelParams | None = None) -> list[CheckResult]:
    params = params or ModelParams()
    rng = np.random.default_rng(SELFTEST_SEED)
    results = (
        _guarded("spectral", lambda: _spectral(rng, params))
        + _guarded("nonlinearity", lambda: _nonlinearity(rng, params))
        + _guarded("solver", lambda: _solver(params))
        + _guarded("bounds", lambda: _bounds(params))
    )
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error("selftest failures: %s", ", ".join(failed))
    return results
