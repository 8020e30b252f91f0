"""Model parameters and experiment configuration. Pydantic on the boundary."""

from __future__ import annotations

from typing import Literal, Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import DEFAULT_SEED, NOISE_DELTA, NOISE_SCALE, OUT_DIR, XI_AMP

Experiment = Literal["simulate", "rates-noise", "rates-galerkin", "rates-time", "moments", "check-bounds"]


class ModelParams(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False, extra="forbid")

    c0: float = Field(default=1.0, gt=0)
    c1: float = -1.0
    T: float = Field(default=1.0, gt=0)
    beta: float = Field(default=0.5, gt=-0.25)
    gamma: float = 0.3
    eps: float = Field(default=0.5, gt=0)

    @model_validator(mode="after")
    def _gamma_window(self) -> Self:
        upper = min(1.0, 0.5 + self.beta)
        if not 0.25 < self.gamma < upper:
            raise ValueError(f"gamma must lie in (1/4, {upper:g}), got {self.gamma:g}")
        return self


class NoiseConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    m_noise: int = Field(default=512, ge=1)
    delta: float = Field(default=NOISE_DELTA, gt=0)
    scale: float = Field(default=NOISE_SCALE, ge=0)


class InitialCondition(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    law: Literal["power", "zero", "first_mode"] = "power"
    amp: float = XI_AMP


class SolverSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_modes: int = Field(default=64, ge=1)
    n_steps: int = Field(default=1024, ge=1)
    integrator: Literal["exp_euler", "ode_euler"] = "exp_euler"


class MomentSettings(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    alpha: float = Field(default=0.2, gt=0, lt=0.5)
    p: float = 6.0
    n_keep: int = Field(default=64, ge=1)

    @model_validator(mode="after")
    def _p_above_inverse_alpha(self) -> Self:
        if self.p * self.alpha <= 1:
            raise ValueError(f"p must exceed 1/alpha = {1 / self.alpha:g}, got p = {self.p:g}")
        return self


class BoundSettings(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    iota: float = 0.5
    rho: float = Field(default=0.0, ge=0, lt=0.25)
    alpha1: float = 0.8
    kappa: float = Field(default=0.9, ge=0.5, lt=1.0)
    alpha2: float = Field(default=0.3, gt=0.25, lt=0.5)
    top_mode: Literal["certified", "estimated"] = "certified"

    @model_validator(mode="after")
    def _alpha1_window(self) -> Self:
        if not 0.75 < self.alpha1 < 1 - self.rho:
            raise ValueError(f"alpha1 must lie in (3/4, {1 - self.rho:g}), got {self.alpha1:g}")
        if self.top_mode == "estimated" and self.alpha1 >= (2 + self.alpha2) / 3:
            raise ValueError(f"estimated top mode needs alpha1 < {(2 + self.alpha2) / 3:g}, got {self.alpha1:g}")
        return self


class RunConfig(BaseModel):
    """Everything needed to reproduce one experiment byte-for-byte."""

    model_config = ConfigDict(extra="forbid")

    experiment: Experiment
    model: ModelParams = Field(default_factory=ModelParams)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    xi: InitialCondition = Field(default_factory=InitialCondition)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    ladder: list[int] = Field(default_factory=lambda: [16, 32, 64, 128, 256])
    n_ref: int | None = None
    paths: int = Field(default=64, ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    threads: int = Field(default=1, ge=1)
    out_dir: str = str(OUT_DIR)
    moment: MomentSettings = Field(default_factory=MomentSettings)
    bounds: BoundSettings = Field(default_factory=BoundSettings)

    @field_validator("ladder")
    @classmethod
    def _strictly_increasing(cls, v: list[int]) -> list[int]:
        if any(n < 1 for n in v):
            raise ValueError("ladder entries must be positive")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("ladder must be strictly increasing")
        return v

    @model_validator(mode="after")
    def _fits_noise_resolution(self) -> Self:
        # rates-time ladders count time steps, not modes
        top = 0 if self.experiment == "rates-time" else max(self.ladder, default=0)
        if top > self.noise.m_noise:
            raise ValueError(f"largest ladder entry {top} exceeds m_noise = {self.noise.m_noise}")
        if self.n_ref is not None:
            if self.n_ref <= top:
                raise ValueError(f"n_ref = {self.n_ref} must be strictly finer than ladder max {top}")
            if self.n_ref > self.noise.m_noise:
                raise ValueError(f"n_ref = {self.n_ref} exceeds m_noise = {self.noise.m_noise}")
        solves = ("simulate", "check-bounds", "rates-time")
        if self.experiment in solves and self.solver.n_modes > self.noise.m_noise:
            raise ValueError("solver n_modes exceeds m_noise")
        if self.experiment == "moments" and self.moment.n_keep > self.noise.m_noise:
            raise ValueError("moment n_keep exceeds m_noise")
        return self

    @classmethod
    def defaults(cls, experiment: Experiment) -> Self:
        """Desk-scale defaults for each experiment."""
        presets: dict[str, dict] = {
            "simulate": {
                "noise": {"m_noise": 64},
                "solver": {"n_modes": 64, "n_steps": 1024},
                "ladder": [],
                "paths": 1,
            },
            "rates-noise": {
                "noise": {"m_noise": 2048},
                "solver": {"n_steps": 256},
                "ladder": [16, 32, 64, 128, 256],
                "paths": 512,
            },
            "rates-galerkin": {
                "noise": {"m_noise": 512},
                "solver": {"n_steps": 4096},
                "ladder": [8, 16, 32, 64],
                "n_ref": 512,
                "paths": 64,
            },
            "rates-time": {
                "model": {"T": 0.1},
                "noise": {"m_noise": 64, "scale": 0.0},
                "xi": {"law": "first_mode", "amp": 0.1},
                "solver": {"n_modes": 64},
                "ladder": [256, 512, 1024, 2048, 4096, 8192],
                "paths": 1,
            },
            "moments": {
                "noise": {"m_noise": 64},
                "solver": {"n_steps": 256},
                "ladder": [],
                "paths": 1000,
            },
            "check-bounds": {
                "noise": {"m_noise": 64},
                "solver": {"n_modes": 32, "n_steps": 1024},
                "ladder": [8, 16, 32],
                "paths": 100,
            },
        }
        return cls.model_validate({"experiment": experiment, **presets[experiment]})
