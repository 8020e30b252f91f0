"""Galerkin mild equation X_t = e^{tA} P xi + int_0^t e^{(t-s)A} P F(X_s) ds + P O_t on N modes."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import BLOWUP_LIMIT, INTEGRATORS
from .noise import NoisePathSet, NoiseSpec, uniform_grid
from .nonlinearity import F_coefficients
from .params import ModelParams
from .spectral import eigenvalues, hr_norms, project, semigroup_factors
from .types import SpectralVector

logger = logging.getLogger("sburgers.solver")


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SolverConfig:
    n_modes: int
    n_steps: int
    params: ModelParams
    spec: NoiseSpec
    xi: SpectralVector
    integrator: str = "exp_euler"

    def __post_init__(self) -> None:
        if self.n_modes < 1:
            raise SolverError(f"need at least one Galerkin mode, got {self.n_modes}")
        if self.n_steps < 1:
            raise SolverError(f"need at least one time step, got {self.n_steps}")
        if self.integrator not in INTEGRATORS:
            raise SolverError(f"unknown integrator {self.integrator!r}")

    @property
    def dt(self) -> float:
        return self.params.T / self.n_steps

    @property
    def grid(self) -> np.ndarray:
        return uniform_grid(self.params.T, self.n_steps)

    @property
    def initial_state(self) -> SpectralVector:
        return project(self.xi, self.n_modes)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.params.model_dump_json().encode())
        h.update(json.dumps([self.n_modes, self.n_steps, self.integrator, self.spec.law, self.spec.beta]).encode())
        h.update(self.spec.amps.tobytes())
        h.update(self.xi.coeffs.tobytes())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_steps + 1, n_modes)
    noise: NoisePathSet
    config_hash: str
    seed: int

    @property
    def n_modes(self) -> int:
        return self.states.shape[1]

    def state(self, k: int) -> SpectralVector:
        return SpectralVector(self.states[k])

    def norms(self, r: float, params: ModelParams) -> np.ndarray:
        return hr_norms(self.states, r, params)

    def sup_norm(self, r: float, params: ModelParams) -> float:
        return float(np.max(self.norms(r, params)))

    def write_csv(self, path: Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "mode", "coefficient"])
            for t, row in zip(self.times, self.states):
                for n, value in enumerate(row, start=1):
                    writer.writerow([repr(float(t)), n, repr(float(value))])

    def summary(self, params: ModelParams) -> dict:
        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "n_modes": self.n_modes,
            "n_steps": len(self.times) - 1,
            "t": [float(t) for t in self.times],
            "norm_H": [float(x) for x in self.norms(0.0, params)],
            "norm_H_gamma": [float(x) for x in self.norms(params.gamma, params)],
            "norm_H_half": [float(x) for x in self.norms(0.5, params)],
        }


def _galerkin_F(x: np.ndarray, params: ModelParams) -> np.ndarray:
    return F_coefficients(x, params)[: len(x)]


def _check_stability(dt: float, config: SolverConfig) -> None:
    top = abs(eigenvalues(config.n_modes, config.params)[-1])
    if dt * top > 1:
        raise SolverError(
            f"explicit Euler unstable: dt*|mu_N| = {dt * top:.4g} > 1 "
            f"(N={config.n_modes}, dt={dt:.4g}); use more steps or exp_euler"
        )


def _exp_euler_update(
    x: np.ndarray, o_now: np.ndarray, o_next: np.ndarray, dt: float, decay: np.ndarray, params: ModelParams,
) -> np.ndarray:
    return decay * (x - o_now + dt * _galerkin_F(x, params)) + o_next


def _ode_euler_update(
    x: np.ndarray, o_now: np.ndarray, o_next: np.ndarray, dt: float, mu: np.ndarray, params: ModelParams,
) -> np.ndarray:
    shifted = x - o_now
    return shifted + dt * (mu * shifted + _galerkin_F(x, params)) + o_next


def step_exp_euler(
    state: SpectralVector, o_now: SpectralVector, o_next: SpectralVector, dt: float, config: SolverConfig,
) -> SpectralVector:
    """X_{k+1} = e^{dt A}(X_k - O_k) + dt e^{dt A} P F(X_k) + O_{k+1}."""
    if dt <= 0:
        raise SolverError(f"dt must be positive, got {dt}")
    n = config.n_modes
    decay = semigroup_factors(dt, n, config.params)
    return SpectralVector(_exp_euler_update(state.padded(n), o_now.padded(n), o_next.padded(n), dt, decay, config.params))


def step_ode_euler(
    state: SpectralVector, o_now: SpectralVector, o_next: SpectralVector, dt: float, config: SolverConfig,
) -> SpectralVector:
    """Explicit Euler on the shifted variable X - O, then add O_{k+1} back."""
    if dt <= 0:
        raise SolverError(f"dt must be positive, got {dt}")
    _check_stability(dt, config)
    n = config.n_modes
    mu = eigenvalues(n, config.params)
    return SpectralVector(_ode_euler_update(state.padded(n), o_now.padded(n), o_next.padded(n), dt, mu, config.params))


def solve(config: SolverConfig, noise: NoisePathSet) -> Trajectory:
    grid = config.grid
    if noise.times.shape != grid.shape or not np.allclose(noise.times, grid, rtol=1e-13, atol=0.0):
        raise SolverError(f"noise grid ({noise.n_steps} steps) does not match solver grid ({config.n_steps} steps)")
    n = config.n_modes
    if noise.m_noise < n:
        raise SolverError(f"noise has {noise.m_noise} modes, solver needs {n}")

    params = config.params
    dt = config.dt
    o = noise.level(n)
    mu = eigenvalues(n, params)
    decay = semigroup_factors(dt, n, params)
    exp_euler = config.integrator == "exp_euler"
    if not exp_euler:
        _check_stability(dt, config)

    states = np.zeros((config.n_steps + 1, n))
    states[0] = config.initial_state.coeffs
    for k in range(config.n_steps):
        if exp_euler:
            nxt = _exp_euler_update(states[k], o[k], o[k + 1], dt, decay, params)
        else:
            nxt = _ode_euler_update(states[k], o[k], o[k + 1], dt, mu, params)
        peak = np.max(np.abs(nxt)) if n else 0.0
        if not np.isfinite(peak) or peak > BLOWUP_LIMIT:
            raise SolverError(f"blow-up at t={grid[k + 1]:.6g}: max |a_n| = {peak:.3g} exceeds {BLOWUP_LIMIT:g}")
        states[k + 1] = nxt
    states.setflags(write=False)
    logger.debug("solved N=%d K=%d %s seed=%d", n, config.n_steps, config.integrator, noise.seed)
    return Trajectory(grid, states, noise, config.digest(), noise.seed)
