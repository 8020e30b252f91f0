"""Exact mode-by-mode sampling of the stochastic convolution O_t = int_0^t e^{(t-s)A} B dW_s.

B is diagonal in the sine basis, B e_n = b_n e_n, so every mode is a scalar
Ornstein-Uhlenbeck process sampled with its exact transition. The normal draw
for (path seed, mode, step) is the step-th output of a Philox stream keyed by
(seed, mode), so every resolution prefix of a path sees the same samples.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import ndtri

from .config import MIN_MOMENT_PATHS, NOISE_DELTA, NOISE_SCALE, UNIFORM_OFFSET
from .params import ModelParams
from .spectral import eigenvalues, hr_norms, zeta_bound
from .types import MomentReport, SpectralVector

logger = logging.getLogger("sburgers.noise")

ENVELOPE_RTOL = 1e-12


class NoiseError(ValueError):
    pass


def _abs_mu(m: int, c0: float) -> np.ndarray:
    n = np.arange(1, m + 1, dtype=np.float64)
    return c0 * math.pi**2 * n * n


def envelope(beta: float, m: int, c0: float, delta: float, scale: float) -> np.ndarray:
    """scale |mu_n|^{-beta} n^{-1/2-delta}, the largest amplitudes the law admits."""
    n = np.arange(1, m + 1, dtype=np.float64)
    return scale * _abs_mu(m, c0) ** -beta * n ** (-0.5 - delta)


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """Diagonal amplitudes b_1..b_M.

    Every law keeps 0 <= b_n <= scale |mu_n|^{-beta} n^{-1/2-delta}, so
    sum b_n^2 |mu_n|^{2 beta} <= scale^2 zeta(1 + 2 delta) < inf.
    """

    beta: float
    amps: np.ndarray
    c0: float
    law: str = "power"
    delta: float = NOISE_DELTA
    scale: float = NOISE_SCALE

    def __post_init__(self) -> None:
        amps = np.array(self.amps, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(amps)) or np.any(amps < 0):
            raise NoiseError("noise amplitudes must be finite and nonnegative")
        if self.delta <= 0:
            raise NoiseError(f"decay margin delta must be positive, got {self.delta}")
        if self.law not in ("power", "custom", "zero"):
            raise NoiseError(f"unknown amplitude law {self.law!r}")
        cap = envelope(self.beta, len(amps), self.c0, self.delta, self.scale)
        if np.any(amps > cap * (1 + ENVELOPE_RTOL)):
            worst = int(np.argmax(amps - cap)) + 1
            raise NoiseError(f"amplitude b_{worst} exceeds the Hilbert-Schmidt envelope for beta={self.beta}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def power_law(
        cls, beta: float, m_noise: int, params: ModelParams,
        delta: float = NOISE_DELTA, scale: float = NOISE_SCALE,
    ) -> NoiseSpec:
        return cls(beta, envelope(beta, m_noise, params.c0, delta, scale), params.c0, "power", delta, scale)

    @classmethod
    def custom(
        cls, beta: float, amps: Iterable[float], params: ModelParams,
        delta: float = NOISE_DELTA, scale: float = NOISE_SCALE,
    ) -> NoiseSpec:
        return cls(beta, np.asarray(list(amps), dtype=np.float64), params.c0, "custom", delta, scale)

    @classmethod
    def zero(cls, beta: float, m_noise: int, params: ModelParams) -> NoiseSpec:
        return cls(beta, np.zeros(m_noise), params.c0, "zero")

    @property
    def m_noise(self) -> int:
        return len(self.amps)

    def hs_sum(self) -> float:
        """sum b_n^2 |mu_n|^{2 beta} over the stored modes."""
        mu = _abs_mu(self.m_noise, self.c0)
        return float(np.sum(self.amps**2 * mu ** (2 * self.beta)))

    def hs_bound(self) -> float:
        """Certified upper bound scale^2 zeta(1 + 2 delta) on the HS norm squared."""
        return self.scale**2 * zeta_bound(1 + 2 * self.delta).upper


def uniform_grid(T: float, n_steps: int) -> np.ndarray:
    if n_steps < 1:
        raise NoiseError(f"need at least one time step, got {n_steps}")
    return np.linspace(0.0, T, n_steps + 1)


def _validate_grid(grid: np.ndarray) -> np.ndarray:
    grid = np.array(grid, dtype=np.float64).reshape(-1)
    if grid.size < 2 or grid[0] != 0.0:
        raise NoiseError("time grid must start at 0 and have at least two points")
    if not np.all(np.isfinite(grid)) or np.any(np.diff(grid) <= 0):
        raise NoiseError("time grid must be strictly increasing")
    return grid


def mode_normals(seed: int, mode: int, n_steps: int) -> np.ndarray:
    """Standard normals for steps 0..n_steps-1 of one (seed, mode) stream."""
    gen = np.random.Generator(np.random.Philox(key=(mode << 64) | seed))
    return ndtri(gen.random(n_steps) + UNIFORM_OFFSET)


def transition(mu: np.ndarray, amps: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Decay e^{mu dt} and standard deviation of the exact OU step of length dt."""
    decay = np.exp(mu * dt)
    var = amps**2 * -np.expm1(2 * mu * dt) / (2 * np.abs(mu))
    return decay, np.sqrt(var)


@dataclass(frozen=True, eq=False)
class NoisePathSet:
    """One coupled sample of O on a time grid; values[k, n-1] = o_n(t_k)."""

    times: np.ndarray
    values: np.ndarray
    seed: int
    spec: NoiseSpec

    @property
    def m_noise(self) -> int:
        return self.values.shape[1]

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    def level(self, n: int) -> np.ndarray:
        """The level-n path: modes 1..n of this sample."""
        if not 0 <= n <= self.m_noise:
            raise NoiseError(f"level {n} outside 0..{self.m_noise}")
        return self.values[:, :n]

    def at(self, k: int, n: int | None = None) -> SpectralVector:
        return SpectralVector(self.values[k, : self.m_noise if n is None else n])

    def subsample(self, stride: int) -> NoisePathSet:
        """Every stride-th grid time. Still an exact sample on the coarse grid."""
        if stride < 1 or self.n_steps % stride:
            raise NoiseError(f"stride {stride} does not divide {self.n_steps} steps")
        values = np.array(self.values[::stride])
        values.setflags(write=False)
        return NoisePathSet(np.array(self.times[::stride]), values, self.seed, self.spec)

    def checksum(self, n_modes: int | None = None) -> str:
        block = np.ascontiguousarray(self.level(self.m_noise if n_modes is None else n_modes))
        return hashlib.sha256(block.tobytes()).hexdigest()

    def write_csv(self, path: Path, n_modes: int | None = None) -> None:
        """Rows (time, mode, value), time-major, floats in repr form."""
        block = self.level(self.m_noise if n_modes is None else n_modes)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "mode", "value"])
            for k, t in enumerate(self.times):
                for n, value in enumerate(block[k], start=1):
                    writer.writerow([repr(float(t)), n, repr(float(value))])


def sample_convolution(
    spec: NoiseSpec, grid: np.ndarray, seed: int, params: ModelParams,
) -> NoisePathSet:
    if not 0 <= seed < 2**64:
        raise NoiseError(f"seed must be an unsigned 64-bit integer, got {seed}")
    if spec.c0 != params.c0:
        raise NoiseError(f"noise spec was built for c0={spec.c0}, model has c0={params.c0}")
    grid = _validate_grid(grid)
    n_steps = len(grid) - 1
    mu = eigenvalues(spec.m_noise, params)
    active = np.flatnonzero(spec.amps > 0)
    normals = np.zeros((n_steps, spec.m_noise))
    for idx in active:
        normals[:, idx] = mode_normals(seed, int(idx) + 1, n_steps)

    values = np.zeros((n_steps + 1, spec.m_noise))
    steps = np.diff(grid)
    uniform = bool(np.all(steps == steps[0]))
    if uniform:
        decay, sigma = transition(mu, spec.amps, float(steps[0]))
    with np.errstate(under="ignore"):
        for k in range(n_steps):
            if not uniform:
                decay, sigma = transition(mu, spec.amps, float(steps[k]))
            values[k + 1] = decay * values[k] + sigma * normals[k]
    values.setflags(write=False)
    grid.setflags(write=False)
    return NoisePathSet(grid, values, seed, spec)


def path_sup_norm(paths: NoisePathSet, n_keep: int, gamma: float, params: ModelParams) -> float:
    """sup_k ||P_{I_n_keep} O_{t_k}||_{H_gamma}."""
    return float(np.max(hr_norms(paths.level(n_keep), gamma, params)))


def tail_sup_norm(paths: NoisePathSet, n_cut: int, gamma: float, params: ModelParams) -> float:
    """sup_k of the H_gamma norm of modes n_cut+1..M of O_{t_k}."""
    if not 1 <= n_cut < paths.m_noise:
        raise NoiseError(f"n_cut must lie in 1..{paths.m_noise - 1}, got {n_cut}")
    tail = paths.values[:, n_cut:]
    weights = np.abs(eigenvalues(paths.m_noise, params)[n_cut:]) ** gamma
    return float(np.max(np.linalg.norm(tail * weights, axis=1)))


# -- closed-form moments --

def convolution_variance(spec: NoiseSpec, n: int, t: float, params: ModelParams) -> float:
    """Var o_n(t) = b_n^2 (1 - e^{2 mu_n t}) / (2 |mu_n|)."""
    if not 1 <= n <= spec.m_noise:
        raise NoiseError(f"mode {n} outside 1..{spec.m_noise}")
    mu = -params.c0 * math.pi**2 * n * n
    return float(spec.amps[n - 1] ** 2 * -math.expm1(2 * mu * t) / (2 * abs(mu)))


def expected_sq_norm(spec: NoiseSpec, t: float, gamma: float, params: ModelParams) -> float:
    """E ||O_t||_{H_gamma}^2 over the stored modes."""
    mu = np.abs(eigenvalues(spec.m_noise, params))
    var = spec.amps**2 * -np.expm1(-2 * mu * t) / (2 * mu)
    return float(np.sum(mu ** (2 * gamma) * var))


def moment_bound_rhs(
    spec: NoiseSpec, n_keep: int, alpha: float, gamma: float, p: float, T: float, params: ModelParams,
) -> float:
    """T^a 2^(a-1) p(p-1)/(p a - 1) [Gamma(1-2a) sum_{n<=n_keep} b_n^2 |mu_n|^(2(a+gamma)-1)]^(1/2)."""
    upper = 0.5 - max(0.0, gamma - spec.beta)
    if not 0 < alpha < upper:
        raise NoiseError(f"alpha must lie in (0, {upper:g}), got {alpha}")
    if p * alpha <= 1:
        raise NoiseError(f"p must exceed 1/alpha = {1 / alpha:g}, got {p}")
    if not 1 <= n_keep <= spec.m_noise:
        raise NoiseError(f"n_keep must lie in 1..{spec.m_noise}, got {n_keep}")
    if T <= 0:
        raise NoiseError(f"horizon must be positive, got {T}")
    mu = np.abs(eigenvalues(n_keep, params))
    total = float(np.sum(spec.amps[:n_keep] ** 2 * mu ** (2 * (alpha + gamma) - 1)))
    return (
        T**alpha * 2 ** (alpha - 1) * p * (p - 1) / (p * alpha - 1)
        * math.sqrt(float(gamma_fn(1 - 2 * alpha)) * total)
    )


def tree_sum(values: np.ndarray) -> float:
    """Pairwise sum in index order; independent of how the values were produced."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    if values.size == 1:
        return float(values[0])
    mid = values.size // 2
    return tree_sum(values[:mid]) + tree_sum(values[mid:])


def summarize_moment(
    sups: np.ndarray, rhs: float, n_keep: int, alpha: float, gamma: float, p: float,
    path_seeds: tuple[int, ...] = (),
) -> MomentReport:
    sups = np.asarray(sups, dtype=np.float64)
    powered = sups**p
    mean = tree_sum(powered) / sups.size
    lhs = mean ** (1 / p)
    var = tree_sum((powered - mean) ** 2) / max(sups.size - 1, 1)
    # delta method on m^(1/p)
    stderr = 0.0 if mean == 0 else lhs / (p * mean) * math.sqrt(var / sups.size)
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    return MomentReport(
        lhs=lhs, rhs=rhs, ratio=ratio, passed=lhs <= rhs, n_paths=int(sups.size),
        n_keep=n_keep, alpha=alpha, gamma=gamma, p=p, stderr=stderr,
        path_seeds=tuple(path_seeds), path_sups=tuple(float(s) for s in sups),
    )


def moment_bound_check(
    paths: Iterable[NoisePathSet],
    spec: NoiseSpec,
    n_keep: int,
    alpha: float,
    gamma: float,
    p: float,
    params: ModelParams,
    min_paths: int = MIN_MOMENT_PATHS,
) -> MomentReport:
    """Empirical (E sup_t ||P O_t||^p_{H_gamma})^{1/p} against the closed-form bound."""
    rhs = moment_bound_rhs(spec, n_keep, alpha, gamma, p, params.T, params)
    seeds: list[int] = []
    sups: list[float] = []
    for path in paths:
        seeds.append(path.seed)
        sups.append(path_sup_norm(path, n_keep, gamma, params))
    if len(sups) < min_paths:
        raise NoiseError(f"moment check needs at least {min_paths} paths, got {len(sups)}")
    report = summarize_moment(np.array(sups), rhs, n_keep, alpha, gamma, p, tuple(seeds))
    logger.info("moment check: lhs=%.6g rhs=%.6g ratio=%.4f over %d paths", report.lhs, rhs, report.ratio, len(sups))
    return report
