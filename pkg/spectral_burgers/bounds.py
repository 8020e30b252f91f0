"""A priori bounds evaluated on simulated trajectories.

Every check compares a grid-time norm of the trajectory with an explicit
right-hand side. Constants are tagged closed-form, derived-certified or
estimated, and a report never mixes certified and estimated inputs without
saying so in its mode.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence

import numpy as np

from .config import BOUND_REL_TOL, REFINEMENT_FACTOR, RESOLUTION_LIMIT
from .noise import NoisePathSet, path_sup_norm
from .nonlinearity import embedding_bracket, estimate_growth_mid, growth_constant
from .params import ModelParams
from .solver import SolverConfig, Trajectory
from .spectral import hr_norm, hr_norms, project
from .types import BoundReport, Constant, GrowthConstants

logger = logging.getLogger("sburgers.bounds")

CLOSED_FORM = "closed-form"
DERIVED = "derived-certified"
ESTIMATED = "estimated"


class BoundError(ValueError):
    pass


def _report(
    name: str,
    mode: str,
    parameters: dict,
    constants: tuple[Constant, ...],
    lhs: np.ndarray,
    rhs: np.ndarray,
    times: np.ndarray,
    path_seed: int | None,
    under_resolved: bool = False,
) -> BoundReport:
    lhs = np.broadcast_to(np.asarray(lhs, dtype=np.float64), times.shape)
    rhs = np.broadcast_to(np.asarray(rhs, dtype=np.float64), times.shape)
    slack = rhs - lhs
    k = int(np.argmin(slack))
    margin = BOUND_REL_TOL * max(1.0, float(np.max(np.abs(rhs))))
    return BoundReport(
        bound_name=name,
        mode=mode,
        parameters=parameters,
        constants=constants,
        rhs=float(rhs[k]),
        lhs=float(lhs[k]),
        passed=bool(np.all(slack >= -margin)),
        slack=float(slack[k]),
        worst_time=float(times[k]),
        path_seed=path_seed,
        under_resolved=under_resolved,
    )


def resolution_number(traj: Trajectory, config: SolverConfig) -> float:
    """dt |c1| sup_t sup_x |X_t| pi N, with sup_x |X_t| bounded by sqrt(2) ||a||_1.

    The continuous-time bounds only describe the discrete trajectory when the
    explicit nonlinear step resolves the fastest advected mode, i.e. when this
    number stays below one.
    """
    params = config.params
    linf = math.sqrt(2) * float(np.max(np.sum(np.abs(traj.states), axis=1)))
    return config.dt * abs(params.c1) * linf * math.pi * config.n_modes


def _flag_resolution(name: str, traj: Trajectory, config: SolverConfig, parameters: dict) -> bool:
    number = resolution_number(traj, config)
    parameters["resolution_number"] = number
    if number <= RESOLUTION_LIMIT:
        return False
    logger.warning(
        "%s: resolution number %.3g exceeds %g (N=%d, K=%d), report is under-resolved",
        name, number, RESOLUTION_LIMIT, config.n_modes, config.n_steps,
    )
    return True


# -- right-hand sides as pure formulas --

def gronwall_rhs(
    o_norm: np.ndarray | float, xi_norm: float, sup_o_half: float, T: float, params: ModelParams,
) -> np.ndarray | float:
    bracket_sq = embedding_bracket(params) ** 2
    a = 3 * params.c1**2 / (8 * params.c0)
    forcing = bracket_sq * (1 + sup_o_half**2) ** 2 * T
    return o_norm + math.sqrt(xi_norm**2 + a * forcing) * math.exp(0.5 * a * forcing)


def bootstrap_rho_rhs(
    xi_rho: float, o_rho: np.ndarray | float, sup_z_sq: float, T: float, rho: float, alpha1: float, K: float,
) -> np.ndarray | float:
    e = 1 - alpha1 - rho
    return xi_rho + o_rho + T**e / e * K * (1 + sup_z_sq)


def bootstrap_top_rhs(
    xi_kappa: float, sup_o_kappa: float, inner: float, T: float, kappa: float, K: float,
) -> float:
    """Outer layer: ||P xi||_kappa + sup ||O||_kappa + T^(1-kappa)/(1-kappa) K inner."""
    return xi_kappa + sup_o_kappa + T ** (1 - kappa) / (1 - kappa) * K * inner


# -- checks --

def gronwall_bound(
    traj: Trajectory, noise: NoisePathSet, config: SolverConfig, iota: float = 0.5,
) -> BoundReport:
    """||X_t||_H against the Gronwall bound with horizon T at every grid time.

    Noise norms use all sampled modes, which dominate the projected ones, so the
    right-hand side does not depend on N for coupled runs.
    """
    if iota != 0.5:
        raise BoundError(f"only iota = 1/2 has certified embedding constants, got {iota}")
    params = config.params
    o_norm = hr_norms(noise.values, 0.0, params)
    sup_o_half = float(np.max(hr_norms(noise.values, iota, params)))
    xi_norm = hr_norm(config.xi, 0.0, params)
    rhs = gronwall_rhs(o_norm, xi_norm, sup_o_half, params.T, params)
    constants = (
        Constant("embedding_bracket", embedding_bracket(params), DERIVED),
        Constant("gronwall_factor", 3 * params.c1**2 / (8 * params.c0), CLOSED_FORM),
    )
    parameters: dict = {"iota": iota, "T": params.T}
    coarse = _flag_resolution("gronwall", traj, config, parameters)
    return _report(
        "gronwall", "certified", parameters, constants,
        traj.norms(0.0, params), rhs, traj.times, traj.seed, coarse,
    )


def _check_rho_window(rho: float, alpha1: float) -> None:
    if not 0 <= rho < 0.25:
        raise BoundError(f"rho must lie in [0, 1/4), got {rho}")
    if not 0.75 < alpha1 < 1 - rho:
        raise BoundError(f"alpha1 must lie in (3/4, {1 - rho:g}), got {alpha1}")


def bootstrap_rho_bound(
    traj: Trajectory, noise: NoisePathSet, config: SolverConfig, rho: float, alpha1: float,
) -> BoundReport:
    """||X_t||_rho <= ||P xi||_rho + ||P O_t||_rho + T^(1-a-rho)/(1-a-rho) K (1 + sup ||X||_H^2)."""
    _check_rho_window(rho, alpha1)
    params = config.params
    growth = growth_constant(alpha1, "l2", params)
    xi_rho = hr_norm(config.initial_state, rho, params)
    o_rho = hr_norms(noise.level(config.n_modes), rho, params)
    sup_z_sq = traj.sup_norm(0.0, params) ** 2
    rhs = bootstrap_rho_rhs(xi_rho, o_rho, sup_z_sq, params.T, rho, alpha1, growth.K)
    return _report(
        "bootstrap_rho", "certified", {"rho": rho, "alpha1": alpha1},
        (Constant("K_" + growth.source, growth.K, DERIVED),),
        traj.norms(rho, params), rhs, traj.times, traj.seed,
    )


def bootstrap_rho_moment_bound(
    trajs: Sequence[Trajectory],
    noises: Sequence[NoisePathSet],
    config: SolverConfig,
    rho: float,
    alpha1: float,
    p: float,
) -> BoundReport:
    """L^p form over the empirical measure of the given paths (Minkowski on the pathwise bound)."""
    _check_rho_window(rho, alpha1)
    if p < 1:
        raise BoundError(f"p must be >= 1, got {p}")
    if not trajs or len(trajs) != len(noises):
        raise BoundError("need one noise path per trajectory")
    params = config.params
    growth = growth_constant(alpha1, "l2", params)
    lhs_sup = np.array([t.sup_norm(rho, params) for t in trajs])
    o_sup = np.array([path_sup_norm(o, config.n_modes, rho, params) for o in noises])
    z_sup_sq = np.array([t.sup_norm(0.0, params) ** 2 for t in trajs])

    def lp(x: np.ndarray) -> float:
        return float(np.mean(x**p) ** (1 / p))

    e = 1 - alpha1 - rho
    lhs = lp(lhs_sup)
    rhs = (
        hr_norm(config.initial_state, rho, params)
        + lp(o_sup)
        + params.T**e / e * growth.K * (1 + lp(z_sup_sq))
    )
    return _report(
        "bootstrap_rho_moment", "certified", {"rho": rho, "alpha1": alpha1, "p": p, "paths": len(trajs)},
        (Constant("K_" + growth.source, growth.K, DERIVED),),
        np.array([lhs]), np.array([rhs]), np.array([params.T]), None,
    )


def bootstrap_top_bound(
    traj: Trajectory,
    noise: NoisePathSet,
    config: SolverConfig,
    kappa: float,
    mode: str = "certified",
    alpha1: float = 0.76,
    alpha2: float = 0.3,
    mid_constant: GrowthConstants | None = None,
    rng: np.random.Generator | None = None,
) -> BoundReport:
    """||X_t||_kappa bounded through the top bootstrap layer.

    certified: the realized sup ||X||_{H_1/2} stands in for the inner bracket.
    estimated: the full three-layer chain with a sampled middle constant.
    """
    if not 0.5 <= kappa < 1:
        raise BoundError(f"kappa must lie in [1/2, 1), got {kappa}")
    params = config.params
    T = params.T
    n = config.n_modes
    o_level = noise.level(n)
    top = growth_constant(0.0, "h_half", params)
    xi_kappa = hr_norm(config.initial_state, kappa, params)
    sup_o_kappa = float(np.max(hr_norms(o_level, kappa, params)))
    constants = [Constant("K_" + top.source, top.K, CLOSED_FORM)]
    parameters: dict = {"kappa": kappa}

    coarse = False
    if mode == "certified":
        inner = 1 + traj.sup_norm(0.5, params) ** 2
        coarse = _flag_resolution("bootstrap_top", traj, config, parameters)
    elif mode == "estimated":
        if not 0.25 < alpha2 < 0.5:
            raise BoundError(f"alpha2 must lie in (1/4, 1/2), got {alpha2}")
        r2 = (1 - alpha2) / 3
        if not 0.75 < alpha1 < (2 + alpha2) / 3:
            raise BoundError(f"alpha1 must lie in (3/4, {(2 + alpha2) / 3:g}), got {alpha1}")
        if mid_constant is None:
            mid_constant = estimate_growth_mid(alpha2, params, rng or np.random.default_rng(0))
        low = growth_constant(alpha1, "l2", params)
        e1 = 1 - alpha1 - r2
        lowest = (
            1 + hr_norm(config.xi, r2, params)
            + float(np.max(hr_norms(o_level, r2, params)))
            + T**e1 / e1 * low.K * traj.sup_norm(0.0, params) ** 2
        )
        e2 = 0.5 - alpha2
        middle = (
            1 + hr_norm(config.xi, 0.5, params)
            + float(np.max(hr_norms(o_level, 0.5, params)))
            + T**e2 / e2 * mid_constant.K * lowest**2
        )
        inner = middle**2
        constants += [
            Constant("K_" + low.source, low.K, DERIVED),
            Constant("K_" + mid_constant.source, mid_constant.K, DERIVED if mid_constant.certified else ESTIMATED),
        ]
        parameters |= {"alpha1": alpha1, "alpha2": alpha2}
    else:
        raise BoundError(f"unknown mode {mode!r}")

    rhs = bootstrap_top_rhs(xi_kappa, sup_o_kappa, inner, T, kappa, top.K)
    return _report(
        "bootstrap_top", mode, parameters, tuple(constants),
        traj.norms(kappa, params), rhs, traj.times, traj.seed, coarse,
    )


def uniform_galerkin_bound(
    trajs_by_n: Mapping[int, Trajectory], iota: float, params: ModelParams,
    factor: float = REFINEMENT_FACTOR,
) -> BoundReport:
    """sup_N sup_t ||X^N_t||_{H_iota} over a ladder, with consecutive growth capped by factor."""
    if len(trajs_by_n) < 2:
        raise BoundError("need at least two resolutions")
    ladder = sorted(trajs_by_n)
    sups = np.array([trajs_by_n[n].sup_norm(iota, params) for n in ladder])
    growth = sups[1:] / np.maximum(sups[:-1], np.finfo(float).tiny)
    worst = float(np.max(growth))
    passed = bool(np.all(np.isfinite(sups)) and worst <= factor)
    if not passed:
        logger.warning("sup norms grow under refinement: %s", dict(zip(ladder, sups.tolist())))
    return BoundReport(
        bound_name="uniform_galerkin",
        mode="estimated",
        parameters={"iota": iota, "ladder": ladder, "sups": sups.tolist(), "factor": factor},
        constants=(),
        rhs=factor,
        lhs=worst,
        passed=passed,
        slack=factor - worst,
        worst_time=None,
        path_seed=trajs_by_n[ladder[0]].seed,
    )
