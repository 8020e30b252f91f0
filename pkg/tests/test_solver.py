import csv

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from spectral_burgers.noise import NoiseSpec, sample_convolution, uniform_grid
from spectral_burgers.nonlinearity import F_direct_coefficients
from spectral_burgers.params import ModelParams
from spectral_burgers.solver import SolverConfig, SolverError, solve, step_exp_euler, step_ode_euler
from spectral_burgers.spectral import apply_semigroup, eigenvalues, hr_norm
from spectral_burgers.types import SpectralVector


def _config(n: int = 8, k: int = 64, params: ModelParams | None = None, xi: SpectralVector | None = None,
            m_noise: int | None = None, zero_noise: bool = False, **kw) -> SolverConfig:
    params = params or ModelParams()
    m = m_noise or n
    spec = NoiseSpec.zero(params.beta, m, params) if zero_noise else NoiseSpec.power_law(params.beta, m, params)
    xi = xi if xi is not None else SpectralVector(0.5 / np.arange(1, m + 1, dtype=np.float64) ** 2)
    return SolverConfig(n_modes=n, n_steps=k, params=params, spec=spec, xi=xi, **kw)


def _noise(config: SolverConfig, seed: int = 3):
    return sample_convolution(config.spec, uniform_grid(config.params.T, config.n_steps), seed, config.params)


class TestConfig:
    def test_dt_and_grid(self):
        c = _config(k=8)
        assert c.dt == pytest.approx(1 / 8)
        assert len(c.grid) == 9

    def test_initial_state_is_projected(self):
        c = _config(n=4, m_noise=16)
        assert len(c.initial_state) == 4
        assert c.initial_state.coeffs == pytest.approx(c.xi.coeffs[:4])

    def test_digest_stable(self):
        assert _config().digest() == _config().digest()
        assert _config().digest() != _config(k=128).digest()

    def test_bad_inputs(self):
        with pytest.raises(SolverError, match="Galerkin mode"):
            _config(n=0, m_noise=4)
        with pytest.raises(SolverError, match="integrator"):
            _config(integrator="rk4")


class TestLinear:
    def test_zero_nonlinearity_is_exact(self):
        params = ModelParams(c1=0.0)
        c = _config(n=12, k=50, params=params)
        noise = _noise(c)
        traj = solve(c, noise)
        for k, t in enumerate(traj.times):
            expected = apply_semigroup(float(t), c.xi, params) + noise.at(k, 12)
            assert np.allclose(traj.states[k], expected.coeffs, rtol=1e-12, atol=1e-14)

    def test_zero_everything_stays_zero(self):
        c = _config(zero_noise=True, xi=SpectralVector.zeros(8))
        traj = solve(c, _noise(c))
        assert np.all(traj.states == 0.0)


class TestNonlinear:
    def test_matches_ode_oracle(self):
        params = ModelParams(T=0.1)
        xi = SpectralVector([0.5, -0.3, 0.2, 0.0, 0.1, 0.0, 0.0, 0.0])
        c = _config(n=8, k=2048, params=params, xi=xi, zero_noise=True)
        traj = solve(c, _noise(c))
        mu = eigenvalues(8, params)

        def rhs(_t, y):
            return mu * y + F_direct_coefficients(y, params)[:8]

        ref = solve_ivp(rhs, (0.0, 0.1), xi.coeffs, method="BDF", t_eval=traj.times, rtol=1e-10, atol=1e-12)
        assert ref.success
        assert np.max(np.abs(traj.states - ref.y.T)) < 1e-3

    def test_matches_ode_oracle_fine(self):
        params = ModelParams(T=0.1)
        n, k = 64, 2**14
        xi = SpectralVector.basis(1, n, scale=0.1)
        c = _config(n=n, k=k, params=params, xi=xi, zero_noise=True)
        traj = solve(c, _noise(c))
        mu = eigenvalues(n, params)

        def rhs(_t, y):
            return mu * y + F_direct_coefficients(y, params)[:n]

        checkpoints = traj.times[::256]
        ref = solve_ivp(rhs, (0.0, 0.1), xi.coeffs, method="BDF", t_eval=checkpoints, rtol=1e-11, atol=1e-13)
        assert ref.success
        assert np.max(np.abs(traj.states[::256] - ref.y.T)) < 1e-6

    def test_integrators_agree(self):
        params = ModelParams(T=0.1)
        xi = SpectralVector([0.5, -0.3, 0.2])

        def final(integrator: str, k: int) -> np.ndarray:
            c = _config(n=8, k=k, params=params, xi=xi, zero_noise=True, integrator=integrator)
            return solve(c, _noise(c)).states[-1]

        exp_fine, exp_coarse = final("exp_euler", 2048), final("exp_euler", 1024)
        ode_fine, ode_coarse = final("ode_euler", 2048), final("ode_euler", 1024)
        increment = max(np.linalg.norm(exp_fine - exp_coarse), np.linalg.norm(ode_fine - ode_coarse))
        assert np.linalg.norm(exp_fine - ode_fine) <= 5 * increment

    def test_energy_decays_without_noise(self):
        c = _config(n=16, k=256, zero_noise=True)
        traj = solve(c, _noise(c))
        norms = traj.norms(0.0, c.params)
        assert norms[-1] < norms[0]
        assert np.all(np.diff(norms) <= 1e-8)

    def test_steps_match_solve(self):
        for integrator in ("exp_euler", "ode_euler"):
            c = _config(n=8, k=2048, integrator=integrator)
            noise = _noise(c)
            traj = solve(c, noise)
            step = step_exp_euler if integrator == "exp_euler" else step_ode_euler
            nxt = step(traj.state(0), noise.at(0, 8), noise.at(1, 8), c.dt, c)
            assert np.array_equal(nxt.coeffs, traj.states[1])

    @pytest.mark.parametrize("integrator", ["exp_euler", "ode_euler"])
    def test_chained_steps_reproduce_trajectory(self, integrator):
        c = _config(n=8, k=1024, integrator=integrator)
        noise = _noise(c)
        traj = solve(c, noise)
        step = step_exp_euler if integrator == "exp_euler" else step_ode_euler
        state = c.initial_state
        for k in range(c.n_steps):
            state = step(state, noise.at(k, 8), noise.at(k + 1, 8), c.dt, c)
        assert np.array_equal(state.coeffs, traj.states[-1])


class TestGuards:
    def test_ode_euler_stability(self):
        c = _config(n=64, k=16, integrator="ode_euler")
        with pytest.raises(SolverError, match="unstable"):
            solve(c, _noise(c))

    def test_blowup(self):
        c = _config(n=4, k=16, xi=SpectralVector.basis(1, 4, scale=1e7), zero_noise=True)
        with pytest.raises(SolverError, match="blow-up"):
            solve(c, _noise(c))

    def test_grid_mismatch(self):
        c = _config(k=64)
        other = _config(k=32)
        with pytest.raises(SolverError, match="grid"):
            solve(c, _noise(other))

    def test_too_few_noise_modes(self):
        c = _config(n=8)
        short = _config(n=4)
        with pytest.raises(SolverError, match="noise has 4 modes"):
            solve(c, _noise(short))

    def test_nonpositive_dt(self):
        c = _config()
        with pytest.raises(SolverError, match="dt"):
            step_exp_euler(SpectralVector.zeros(8), SpectralVector.zeros(8), SpectralVector.zeros(8), 0.0, c)


class TestTrajectory:
    def test_coupled_runs_share_noise(self):
        fine = _config(n=16, m_noise=16)
        coarse = _config(n=8, m_noise=16)
        noise = _noise(fine)
        a, b = solve(fine, noise), solve(coarse, noise)
        assert a.seed == b.seed == 3
        assert a.config_hash != b.config_hash

    def test_norms_and_summary(self, params):
        c = _config(k=16)
        traj = solve(c, _noise(c))
        summary = traj.summary(params)
        assert set(summary) >= {"t", "norm_H", "norm_H_gamma", "norm_H_half", "config_hash", "seed"}
        assert len(summary["norm_H"]) == 17
        assert summary["norm_H"][0] == pytest.approx(hr_norm(c.initial_state, 0.0, params))
        assert traj.sup_norm(0.5, params) == pytest.approx(max(summary["norm_H_half"]))

    def test_states_read_only(self):
        c = _config(k=4)
        traj = solve(c, _noise(c))
        with pytest.raises(ValueError):
            traj.states[0, 0] = 1.0

    def test_write_csv(self, tmp_path):
        c = _config(n=3, k=2)
        traj = solve(c, _noise(c))
        out = tmp_path / "traj.csv"
        traj.write_csv(out)
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["t", "mode", "coefficient"]
        assert len(rows) == 1 + 3 * 3
        assert float(rows[-1][2]) == traj.states[-1, -1]
