import math

import numpy as np
import pytest

from magnon_sense import (EstimationError, FieldPulse, PlanError, SqueezeParams,
                          calibration_plan, paper_system, reconstruct_field,
                          stationary_snr, synthesize_measurements, transient_snr)
from magnon_sense.presets import FIG3_PULSE_AREA, optimal_coupling
from magnon_sense import io as msio


@pytest.fixture(scope="module")
def recon_setup():
    params = paper_system(r0=2.0)
    t_m = 3.0 / params.kappa_m
    grid = np.linspace(-2.0, 2.0, 41) * params.kappa_m
    plan = calibration_plan(params, bias_b=100.0 / params.gamma_gyro,
                            ref_amplitudes=(FIG3_PULSE_AREA, FIG3_PULSE_AREA),
                            t_m=t_m)
    return params, grid, plan


def direction_pulse(phi, theta, magnitude=FIG3_PULSE_AREA):
    return FieldPulse(b0_x=magnitude * math.sin(theta) * math.cos(phi),
                      b0_y=magnitude * math.sin(theta) * math.sin(phi),
                      b0_z=magnitude * math.cos(theta))


class TestTransientSnr:
    def test_zero_signal_zero_snr(self, params_presqueezed, omega_grid):
        r = transient_snr(params_presqueezed, FieldPulse(), 3 / params_presqueezed.kappa_m,
                          omega_grid)
        assert np.all(r.values == 0.0)

    def test_nonnegative_and_finite(self, params_presqueezed, omega_grid):
        r = transient_snr(params_presqueezed, FieldPulse(b0_x=1e-9),
                          3 / params_presqueezed.kappa_m, omega_grid)
        assert np.all(r.values >= 0) and np.all(np.isfinite(r.values))

    def test_monotone_in_presqueezing(self, params):
        # x-channel resonant SNR grows with the preparation squeezing at theta0 = pi
        pulse = FieldPulse(b0_x=1e-9)
        values = []
        for r0 in np.linspace(0.0, 2.0, 9):
            p = paper_system(r0=r0)
            values.append(transient_snr(p, pulse, 3.0 / p.kappa_m,
                                        np.array([0.0])).values[0])
        assert np.all(np.diff(values) > 0)

    def test_noise_breakdown_attached(self, params_presqueezed):
        r = transient_snr(params_presqueezed, FieldPulse(b0_x=1e-9),
                          3 / params_presqueezed.kappa_m, np.array([0.0]))
        assert set(r.noise.components) >= {"transient", "magnon", "cavity"}
        assert r.t_m == 3 / params_presqueezed.kappa_m


class TestStationarySnr:
    def test_zero_signal_zero_snr(self, params, omega_grid):
        r = stationary_snr(params, 0.0, omega_grid)
        assert np.all(r.values == 0.0)

    def test_resonant_snr_insensitive_to_squeezing_at_cancellation(self, params):
        g_opt = optimal_coupling(params)
        values = [stationary_snr(paper_system(r=r, theta=math.pi, g_am=g_opt),
                                 1e-24, np.array([0.0])).values[0]
                  for r in np.linspace(0.0, 1.5, 7)]
        assert max(values) - min(values) <= 1e-10 * values[0]

    def test_band_above_unity_broadens_with_squeezing(self, params, omega_grid):
        g_opt = optimal_coupling(params)
        r0 = stationary_snr(paper_system(g_am=g_opt), 1e-24, omega_grid).values
        r15 = stationary_snr(paper_system(r=1.5, theta=math.pi, g_am=g_opt),
                             1e-24, omega_grid).values
        band0 = r0 > 1.0
        band15 = r15 > 1.0
        assert np.all(band15[band0])          # inclusion
        assert band15.sum() > band0.sum()     # strict


class TestCalibrationPlan:
    def test_default_plan_has_eight_configurations(self, recon_setup):
        _, _, plan = recon_setup
        assert len(plan.entries) == 8
        labels = [e.label for e in plan.entries]
        assert labels == ["unknown_x", "unknown_y", "unknown_bias_plus",
                          "unknown_bias_minus", "ref_x", "ref_y", "zero_field",
                          "bias_cal"]
        assert len(plan.run_specs()) == 10

    def test_bias_stage_shares_random_streams(self, recon_setup):
        # all four bias-stage runs pair up for the double difference
        _, _, plan = recon_setup
        groups = {run.label: run.seed_group for run in plan.run_specs()}
        assert groups["unknown_bias_plus"] == groups["unknown_bias_minus"] \
            == groups["bias_cal_plus"] == groups["bias_cal_minus"]
        assert groups["unknown_x"] != groups["unknown_bias_plus"]
        assert groups["zero_field_x"] != groups["bias_cal_plus"]

    def test_channel_preparations(self, recon_setup):
        _, _, plan = recon_setup
        assert plan.prep_x.theta == pytest.approx(math.pi)
        assert plan.prep_y.theta == 0.0

    def test_zero_bias_rejected(self, recon_setup):
        params, _, _ = recon_setup
        with pytest.raises(PlanError):
            calibration_plan(params, bias_b=0.0, ref_amplitudes=(1e-12, 1e-12),
                             t_m=1e-7)

    def test_sign_stage_linear_in_reference(self, recon_setup):
        # the reference-induced band shift is 2*B*ref + ref^2
        params, grid, plan = recon_setup
        pulse = direction_pulse(0.3, 1.1)
        t_m = plan.t_m
        band = np.abs(grid) <= plan.band_half_width

        def shift(ref):
            p2 = calibration_plan(params, bias_b=plan.bias_b,
                                  ref_amplitudes=(ref, ref), t_m=t_m)
            m = synthesize_measurements(p2, pulse, params, grid)
            d = (m["ref_x"].values - m["unknown_x"].values)[band].mean()
            return t_m * d - ref ** 2

        r = FIG3_PULSE_AREA
        assert shift(2 * r) == pytest.approx(2 * shift(r), rel=1e-9)


class TestReconstructionNoiseless:
    def test_axis_case_x(self, recon_setup):
        params, grid, plan = recon_setup
        measured = synthesize_measurements(plan, FieldPulse(b0_x=FIG3_PULSE_AREA),
                                           params, grid)
        res = reconstruct_field(measured, plan, params)
        assert res.phi_hat == pytest.approx(0.0, abs=math.radians(2))
        assert res.theta_hat == pytest.approx(math.pi / 2, abs=math.radians(2))
        assert res.b_hat[0] == pytest.approx(FIG3_PULSE_AREA, rel=1e-6)

    def test_axis_case_z(self, recon_setup):
        params, grid, plan = recon_setup
        measured = synthesize_measurements(plan, FieldPulse(b0_z=FIG3_PULSE_AREA),
                                           params, grid)
        res = reconstruct_field(measured, plan, params)
        assert res.theta_hat == pytest.approx(0.0, abs=math.radians(2))
        assert res.gamma_b0_z_hat == pytest.approx(
            params.gamma_gyro * FIG3_PULSE_AREA, rel=1e-9)

    def test_general_direction_round_trip(self, recon_setup):
        params, grid, plan = recon_setup
        phi, theta = 2.2, 0.85
        pulse = direction_pulse(phi, theta)
        measured = synthesize_measurements(plan, pulse, params, grid)
        res = reconstruct_field(measured, plan, params)
        assert res.phi_hat == pytest.approx(phi, abs=1e-4)
        assert res.theta_hat == pytest.approx(theta, abs=1e-4)
        for est, true in zip(res.b_hat[:2], (pulse.b0_x, pulse.b0_y)):
            assert est == pytest.approx(true, rel=1e-6)

    def test_double_difference_nulls_without_longitudinal_field(self, recon_setup):
        params, grid, plan = recon_setup
        pulse = FieldPulse(b0_x=2e-12, b0_y=-3e-12)
        measured = synthesize_measurements(plan, pulse, params, grid)
        d = measured["unknown_bias_plus"].values - measured["unknown_bias_minus"].values
        d0 = measured["bias_cal_plus"].values - measured["bias_cal_minus"].values
        scale = measured["bias_cal_plus"].values.max()
        assert np.abs(d - d0).max() <= 1e-12 * scale
        res = reconstruct_field(measured, plan, params)
        assert abs(res.gamma_b0_z_hat) < 1e-9

    def test_crosstalk_free_transverse_estimates(self, recon_setup):
        # perturbing B_y does not move the B_x estimate (and vice versa)
        params, grid, plan = recon_setup
        base = direction_pulse(0.7, 1.0)
        delta = 0.2 * FIG3_PULSE_AREA

        def estimate(pulse):
            measured = synthesize_measurements(plan, pulse, params, grid)
            return reconstruct_field(measured, plan, params).b_hat

        b_base = estimate(base)
        b_pert = estimate(FieldPulse(base.b0_x, base.b0_y + delta, base.b0_z))
        diag_sensitivity = abs(b_pert[1] - b_base[1]) / delta
        cross_sensitivity = abs(b_pert[0] - b_base[0]) / delta
        assert diag_sensitivity == pytest.approx(1.0, rel=1e-6)
        assert cross_sensitivity < 1e-6 * diag_sensitivity

    def test_missing_run_raises_plan_error(self, recon_setup):
        params, grid, plan = recon_setup
        measured = synthesize_measurements(plan, FieldPulse(b0_x=1e-12), params, grid)
        del measured["ref_y"]
        with pytest.raises(PlanError, match="ref_y"):
            reconstruct_field(measured, plan, params)

    def test_inconsistent_floor_raises_estimation_error(self, recon_setup):
        # a measured power below the zero-field floor has no consistent
        # (B_x)^2 explanation
        params, grid, plan = recon_setup
        measured = synthesize_measurements(plan, FieldPulse(b0_x=1e-12), params, grid)
        bad = measured["unknown_x"]
        measured["unknown_x"] = type(bad)(
            omega=bad.omega, values=0.5 * measured["zero_field_x"].values,
            channel=bad.channel, units=bad.units, components=bad.components)
        with pytest.raises(EstimationError):
            reconstruct_field(measured, plan, params)

    def test_angle_ranges(self, recon_setup):
        params, grid, plan = recon_setup
        for phi, theta in ((5.9, 0.4), (3.4, 2.9), (1.2, 1.6)):
            pulse = direction_pulse(phi, theta)
            measured = synthesize_measurements(plan, pulse, params, grid)
            res = reconstruct_field(measured, plan, params)
            assert -math.pi < res.phi_hat <= math.pi
            assert 0.0 <= res.theta_hat <= math.pi


class TestExternalSpectraIngestion:
    def test_csv_round_trip_reconstruction(self, recon_setup, tmp_path):
        params, grid, plan = recon_setup
        pulse = direction_pulse(1.0, 0.6)
        measured = synthesize_measurements(plan, pulse, params, grid)
        loaded = {}
        for label, series in measured.items():
            path = str(tmp_path / f"{label}.csv")
            msio.write_spectrum(path, series)
            loaded[label] = msio.read_spectrum(path)
        res_direct = reconstruct_field(measured, plan, params)
        res_loaded = reconstruct_field(loaded, plan, params)
        assert res_loaded.phi_hat == pytest.approx(res_direct.phi_hat, abs=1e-9)
        assert res_loaded.theta_hat == pytest.approx(res_direct.theta_hat, abs=1e-9)
