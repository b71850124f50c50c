import math

import numpy as np
import pytest

from magnon_sense import (CovarianceState, FieldPulse, LinearSystem, PhysicsError,
                          SqueezeParams, build_diffusion, build_drift,
                          evolve_covariance, monte_carlo_covariance,
                          monte_carlo_output_spectrum, pulse_jump,
                          steady_covariance, paper_system)
from magnon_sense.dynamics import input_noise_blocks


class TestBuildDrift:
    def test_matrix_structure(self, params):
        ka, km, g = params.kappa_a, params.kappa_m, params.g_am
        expected = np.array([
            [-ka / 2, 0, 0, g],
            [0, -ka / 2, -g, 0],
            [0, g, -km / 2, 0],
            [-g, 0, 0, -km / 2],
        ])
        assert np.array_equal(build_drift(params), expected)

    def test_trace(self, params):
        a = build_drift(params)
        assert np.trace(a) == pytest.approx(-(params.kappa_a + params.kappa_m), rel=1e-14)

    def test_decoupled_limit_is_block_diagonal_decay(self, params):
        p = params.with_(g_am=1e-300)
        a = build_drift(p)
        off = a - np.diag(np.diag(a))
        assert np.abs(off).max() <= 1e-300

    def test_paper_params_are_hurwitz(self, params):
        LinearSystem(build_drift(params), build_diffusion(params, params.bath_squeeze))


class TestBuildDiffusion:
    def test_vacuum_inputs(self, params):
        d = build_diffusion(params, SqueezeParams())
        ka, km = params.kappa_a, params.kappa_m
        assert np.allclose(d, np.diag([ka / 2, ka / 2, km / 2, km / 2]), rtol=1e-12)

    def test_squeezed_cavity_block_r2_theta_pi(self, params):
        d = build_diffusion(params, SqueezeParams(2.0, math.pi))
        ka = params.kappa_a
        assert d[0, 0] == pytest.approx(ka * math.exp(-4.0) / 2, rel=1e-12)
        assert d[1, 1] == pytest.approx(ka * math.exp(+4.0) / 2, rel=1e-12)
        assert d[0, 1] == pytest.approx(0.0, abs=1e-12 * ka)

    def test_theta_half_pi_off_diagonal(self, params):
        sq = SqueezeParams(1.0, math.pi / 2)
        d = build_diffusion(params, sq)
        im_m = math.sinh(1.0) * math.cosh(1.0)  # (2n+1) sin(theta) sinh r cosh r at n=0
        assert d[0, 1] == pytest.approx(params.kappa_a * im_m, rel=1e-12)
        assert d[0, 1] == d[1, 0]

    def test_positive_semidefinite(self, params):
        for sq in (SqueezeParams(), SqueezeParams(2.0, 0.3), SqueezeParams(1.0, 4.0)):
            d = build_diffusion(params.with_(temperature=0.1), sq)
            assert np.linalg.eigvalsh(d).min() >= -1e-12 * np.linalg.norm(d)


class TestSteadyCovariance:
    def test_vacuum_fixed_point(self, params):
        a = build_drift(params)
        d = build_diffusion(params, SqueezeParams())
        sigma = steady_covariance(a, d).sigma
        assert np.allclose(sigma, 0.5 * np.eye(4), atol=1e-12)

    def test_decoupled_squeezed_bath_fixed_point(self, params):
        p = params.with_(g_am=1e-280)
        a = build_drift(p)
        for r0 in (0.5, 1.0, 2.0):
            d = build_diffusion(p, SqueezeParams(r0, math.pi))
            sigma = steady_covariance(a, d).sigma
            assert sigma[0, 0] == pytest.approx(math.exp(-2 * r0) / 2, rel=1e-10)
            assert sigma[1, 1] == pytest.approx(math.exp(+2 * r0) / 2, rel=1e-10)

    def test_lyapunov_residual(self, params_presqueezed):
        p = params_presqueezed
        a = build_drift(p)
        d = build_diffusion(p, p.pre_squeeze)
        sigma = steady_covariance(a, d).sigma
        res = np.linalg.norm(a @ sigma + sigma @ a.T + d)
        assert res <= 1e-10 * np.linalg.norm(d)

    def test_non_hurwitz_rejected(self):
        a = np.diag([1.0, -1.0, -1.0, -1.0])
        with pytest.raises(PhysicsError, match="stationary"):
            steady_covariance(a, np.eye(4))

    def test_against_time_integration_oracle(self, params_presqueezed):
        p = params_presqueezed
        a = build_drift(p)
        d = build_diffusion(p, p.pre_squeeze)
        direct = steady_covariance(a, d).sigma
        relaxed = evolve_covariance(a, d, CovarianceState(0.5 * np.eye(4)),
                                    60.0 / min(p.kappa_a, p.kappa_m)).sigma
        assert np.abs(direct - relaxed).max() <= 1e-8 * np.abs(direct).max()


class TestEvolveCovariance:
    def test_zero_time_identity(self, params):
        sigma0 = CovarianceState(0.5 * np.eye(4))
        out = evolve_covariance(build_drift(params),
                                build_diffusion(params, SqueezeParams()), sigma0, 0.0)
        assert np.array_equal(out.sigma, sigma0.sigma)

    def test_negative_time_rejected(self, params):
        with pytest.raises(PhysicsError):
            evolve_covariance(build_drift(params),
                              build_diffusion(params, SqueezeParams()),
                              CovarianceState(0.5 * np.eye(4)), -1.0)

    def test_long_time_matches_steady(self, params_presqueezed):
        p = params_presqueezed
        a = build_drift(p)
        d = build_diffusion(p, p.pre_squeeze)
        target = steady_covariance(a, d).sigma
        # 50 lifetimes of the slowest decay channel
        out = evolve_covariance(a, d, CovarianceState(0.5 * np.eye(4)),
                                50.0 / min(p.kappa_a, p.kappa_m)).sigma
        assert np.abs(out - target).max() / np.abs(target).max() < 1e-8

    def test_decoupled_single_mode_relaxation(self, params):
        # for g = 0 each block relaxes as e^{-kappa t} sigma0 + (1-e^{-kappa t}) sigma_inf
        p = params.with_(g_am=1e-280)
        a = build_drift(p)
        d = build_diffusion(p, SqueezeParams(1.0, math.pi))
        sigma0 = CovarianceState(np.diag([0.9, 0.9, 0.7, 0.7]))
        t = 1.0 / p.kappa_a
        out = evolve_covariance(a, d, sigma0, t).sigma
        sig_inf = steady_covariance(a, d).sigma
        for i in range(4):
            kappa = p.kappa_a if i < 2 else p.kappa_m
            expected = (math.exp(-kappa * t) * sigma0.sigma[i, i]
                        + (1 - math.exp(-kappa * t)) * sig_inf[i, i])
            assert out[i, i] == pytest.approx(expected, rel=1e-9)

    def test_symmetry_enforced_and_physical(self, params_presqueezed):
        p = params_presqueezed
        a = build_drift(p)
        d = build_diffusion(p, p.pre_squeeze)
        sigma = CovarianceState(0.5 * np.eye(4))
        for t in (0.1 / p.kappa_m, 1.0 / p.kappa_m, 10.0 / p.kappa_m):
            out = evolve_covariance(a, d, sigma, t)
            assert np.array_equal(out.sigma, out.sigma.T)
            # CovarianceState construction enforces the uncertainty bound

    def test_exponential_convergence_rate(self, params):
        # error to the fixed point decays like e^{2 max Re lambda t}
        p = params
        a = build_drift(p)
        d = build_diffusion(p, SqueezeParams(1.5, math.pi))
        target = steady_covariance(a, d).sigma
        rate = 2 * np.linalg.eigvals(a).real.max()
        ts = np.linspace(2.0, 20.0, 8) / p.kappa_a
        errs = []
        for t in ts:
            out = evolve_covariance(a, d, CovarianceState(0.5 * np.eye(4)), t).sigma
            errs.append(np.abs(out - target).max())
        slope = np.polyfit(ts, np.log(errs), 1)[0]
        assert slope == pytest.approx(rate, rel=0.1)


class TestPulseJump:
    def test_displacement_at_zero_phase(self, params):
        pulse = FieldPulse(b0_x=3e-9, b0_y=-2e-9)
        disp, kick = pulse_jump(params, pulse)
        eps = params.epsilon_b
        assert disp[0] == disp[1] == 0.0
        assert disp[2] == pytest.approx(-math.sqrt(2) * eps * pulse.b0_y, rel=1e-12)
        assert disp[3] == pytest.approx(+math.sqrt(2) * eps * pulse.b0_x, rel=1e-12)
        assert np.array_equal(kick, np.eye(4))

    def test_longitudinal_kick_rotates_magnon_plane(self, params):
        beta = 0.125
        pulse = FieldPulse(b0_z=beta / params.gamma_gyro)
        _, kick = pulse_jump(params, pulse)
        expected = np.eye(4)
        expected[2, 3] = beta
        expected[3, 2] = -beta
        assert np.allclose(kick, expected, rtol=1e-12)

    def test_quarter_period_phase_swaps_axes(self, params):
        pulse = FieldPulse(b0_x=1e-9)
        disp, _ = pulse_jump(params, pulse, arrival_phase=math.pi / 2)
        eps = params.epsilon_b
        assert disp[2] == pytest.approx(-math.sqrt(2) * eps * pulse.b0_x, rel=1e-12)
        assert abs(disp[3]) < 1e-12 * eps * pulse.b0_x


class TestMonteCarlo:
    def test_reproduces_lyapunov_variance(self, params):
        n_traj = 4000
        cov = monte_carlo_covariance(params, params.bath_squeeze, 2.0 / params.kappa_m,
                                     n_traj=n_traj, seed=11)
        sigma = steady_covariance(build_drift(params),
                                  build_diffusion(params, params.bath_squeeze)).sigma
        rel = abs(cov[0, 0] - sigma[0, 0]) / sigma[0, 0]
        assert rel < 4.0 / math.sqrt(n_traj)

    def test_theta_half_pi_cross_correlation(self, params):
        # off-diagonal bath correlations propagate into <a_x a_p> of the state
        p = params.with_(bath_squeeze=SqueezeParams(1.0, math.pi / 2),
                         pre_squeeze=SqueezeParams(1.0, math.pi / 2))
        n_traj = 20000
        cov = monte_carlo_covariance(p, p.bath_squeeze, 1.0 / p.kappa_m,
                                     n_traj=n_traj, seed=5)
        sigma = steady_covariance(build_drift(p),
                                  build_diffusion(p, p.bath_squeeze)).sigma
        assert abs(sigma[0, 1]) > 0.1  # the effect being checked is present
        assert cov[0, 1] == pytest.approx(sigma[0, 1],
                                          abs=6.0 * sigma[1, 1] / math.sqrt(n_traj))

    def test_deterministic_given_seed(self, params_presqueezed):
        grid = np.linspace(-1, 1, 11) * params_presqueezed.kappa_m
        kwargs = dict(pulse=FieldPulse(), t_m=3.0 / params_presqueezed.kappa_m,
                      omega_grid=grid, n_traj=512, seed=42, block_size=128)
        a = monte_carlo_output_spectrum(params_presqueezed, **kwargs)
        b = monte_carlo_output_spectrum(params_presqueezed, **kwargs)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.stderr, b.stderr)

    def test_worker_count_does_not_change_results(self, params_presqueezed, monkeypatch):
        grid = np.linspace(-1, 1, 11) * params_presqueezed.kappa_m
        kwargs = dict(pulse=FieldPulse(), t_m=3.0 / params_presqueezed.kappa_m,
                      omega_grid=grid, n_traj=512, seed=42, block_size=128)
        serial = monte_carlo_output_spectrum(params_presqueezed, **kwargs)
        monkeypatch.setenv("MAGNON_SENSE_WORKERS", "4")
        threaded = monte_carlo_output_spectrum(params_presqueezed, **kwargs)
        assert np.array_equal(serial.values, threaded.values)

    def test_standard_error_shrinks_with_trajectories(self, params):
        grid = np.array([0.0])
        common = dict(pulse=FieldPulse(), t_m=3.0 / params.kappa_m, omega_grid=grid,
                      block_size=512)
        se_small = monte_carlo_output_spectrum(params, n_traj=1024, seed=3,
                                               **common).stderr[0]
        se_large = monte_carlo_output_spectrum(params, n_traj=4096, seed=3,
                                               **common).stderr[0]
        assert se_large / se_small == pytest.approx(0.5, rel=0.35)

    def test_pulse_enters_signal_component_not_noise(self, params):
        grid = np.linspace(-1, 1, 21) * params.kappa_m
        t_m = 3.0 / params.kappa_m
        quiet = monte_carlo_output_spectrum(params, FieldPulse(), t_m, grid,
                                            n_traj=1024, seed=9)
        loud = monte_carlo_output_spectrum(params, FieldPulse(b0_x=1e-9), t_m, grid,
                                           n_traj=1024, seed=9)
        expected = (1e-9) ** 2 / t_m
        assert loud.components["signal"].mean() == pytest.approx(expected, rel=0.05)
        assert np.allclose(loud.components["noise"], quiet.components["noise"],
                           rtol=1e-6)

    def test_validation_errors(self, params):
        with pytest.raises(PhysicsError):
            monte_carlo_output_spectrum(params, FieldPulse(), -1.0, np.array([0.0]),
                                        n_traj=10, seed=0)
        with pytest.raises(PhysicsError):
            monte_carlo_output_spectrum(params, FieldPulse(), 1e-7, np.array([0.0]),
                                        n_traj=0, seed=0)
        with pytest.raises(PhysicsError):
            monte_carlo_output_spectrum(params, FieldPulse(), 1e-7, np.array([0.0]),
                                        n_traj=10, seed=0, step_divisor=10)
