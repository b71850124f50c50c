"""Built-in parameter presets and figure-data generators.

The presets encode the experimentally accessible operating point used
throughout: cavity and magnon resonant at 7.875 GHz, kappa_a/2pi = 2.09 MHz,
kappa_m/2pi = 6 MHz, g_am = 177 kHz (converted to angular units on ingest),
gyromagnetic ratio 28 GHz/T, T = 5 mK, s = 5/2, N_s = 3.5e9.  Quantities the
source material leaves open (pulse scales, sweep ranges, panel grids) are
documented in each panel's metadata.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError
from .model import FieldPulse, SqueezeParams, SystemParams, epsilon_b_default
from .sensing import calibration_plan, reconstruct_field, synthesize_measurements, transient_snr, stationary_snr
from .spectra import prepared_covariance, stationary_psd, noise_ratio, xi_factors
from . import io

TWO_PI = 2.0 * math.pi

GAMMA_GYRO = TWO_PI * 28e9


def paper_system(r: float = 0.0, theta: float = 0.0, r0: float = 0.0,
                 theta0: float = math.pi, temperature: float = 5e-3,
                 n_spheres: int = 1, g_am: float | None = None) -> SystemParams:
    """The reference operating point with configurable squeezing stages."""
    return SystemParams(
        omega_a=TWO_PI * 7.875e9,
        kappa_a=TWO_PI * 2.09e6,
        kappa_m=TWO_PI * 6e6,
        g_am=TWO_PI * 1.77e5 if g_am is None else g_am,
        gamma_gyro=GAMMA_GYRO,
        epsilon_b=epsilon_b_default(GAMMA_GYRO, 2.5, 3.5e9),
        temperature=temperature,
        n_spheres=n_spheres,
        bath_squeeze=SqueezeParams(r=r, theta=theta),
        pre_squeeze=SqueezeParams(r=r0, theta=theta0),
    )


def optimal_coupling(params: SystemParams) -> float:
    """Coupling at which the cavity-added noise cancels on resonance."""
    return math.sqrt(params.kappa_a * params.kappa_m) / 2.0


# reconstruction demo scale: a unit longitudinal kick angle per unit |B|
FIG3_PULSE_AREA = 1.0 / GAMMA_GYRO
FIG2C_PULSE_AREA = 5e-7  # T*s; keeps the x-channel SNR above 1 out to kick 1e6


def iso_contours(x: np.ndarray, y: np.ndarray, z: np.ndarray, level: float):
    """Marching-squares iso-contour polylines of z(y, x) at `level`.

    `z` has shape (len(y), len(x)).  Returns a list of (n, 2) arrays of
    (x, y) vertices with linear interpolation along cell edges.
    """
    ny, nx = z.shape
    if (ny, nx) != (len(y), len(x)):
        raise ConfigError("contour grid shape mismatch")
    segments = []

    def interp(p1, p2, v1, v2):
        t = (level - v1) / (v2 - v1)
        return (p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1]))

    for i in range(ny - 1):
        for j in range(nx - 1):
            corners = [
                ((x[j], y[i]), z[i, j]),
                ((x[j + 1], y[i]), z[i, j + 1]),
                ((x[j + 1], y[i + 1]), z[i + 1, j + 1]),
                ((x[j], y[i + 1]), z[i + 1, j]),
            ]
            crossings = []
            for k in range(4):
                (p1, v1), (p2, v2) = corners[k], corners[(k + 1) % 4]
                if (v1 - level) * (v2 - level) < 0:
                    crossings.append(interp(p1, p2, v1, v2))
            if len(crossings) == 2:
                segments.append((crossings[0], crossings[1]))
            elif len(crossings) == 4:
                # saddle cell: pair edges by center value
                center = 0.25 * sum(v for _, v in corners)
                if (center - level) * (corners[0][1] - level) >= 0:
                    segments.append((crossings[0], crossings[1]))
                    segments.append((crossings[2], crossings[3]))
                else:
                    segments.append((crossings[3], crossings[0]))
                    segments.append((crossings[1], crossings[2]))

    # chain segments into polylines by matching endpoints
    def key(p):
        return (round(p[0], 12), round(p[1], 12))

    unused = list(range(len(segments)))
    by_end = {}
    for idx in unused:
        a, b = segments[idx]
        by_end.setdefault(key(a), []).append(idx)
        by_end.setdefault(key(b), []).append(idx)
    seen = set()
    polylines = []
    for start in range(len(segments)):
        if start in seen:
            continue
        seen.add(start)
        a, b = segments[start]
        line = [a, b]
        for grow_end in (1, 0):
            while True:
                tip = line[-1] if grow_end else line[0]
                candidates = [i for i in by_end.get(key(tip), []) if i not in seen]
                if not candidates:
                    break
                idx = candidates[0]
                seen.add(idx)
                p, q = segments[idx]
                nxt = q if key(p) == key(tip) else p
                if grow_end:
                    line.append(nxt)
                else:
                    line.insert(0, nxt)
        polylines.append(np.asarray(line))
    return polylines


def _contour_rows(polylines):
    rows = []
    for pid, line in enumerate(polylines):
        for px, py in line:
            rows.append([pid, px, py])
    return rows


def _write(out_dir, name, columns, rows, metadata, fmt):
    ext = "json" if fmt == "json" else "csv"
    return io.write_table(f"{out_dir}/{name}.{ext}", columns, rows, metadata, fmt)


def _fig2(out_dir, fmt):
    files = []
    omega = np.linspace(-5, 5, 501)
    pulse = FieldPulse(b0_x=FIG2C_PULSE_AREA)
    base_meta = {"figure": "fig2", "preset": "r0=2 theta0=pi, sensing squeeze off",
                 "pulse_b0_x_Ts": FIG2C_PULSE_AREA}

    params = paper_system(r0=2.0)
    grid = omega * params.kappa_m
    tms = (3.0, 5.0, 10.0, 50.0)
    cols = ["omega_over_kappa_m"] + [f"r_nsnr_tm{t:g}" for t in tms]
    data = [omega]
    for tm in tms:
        data.append(transient_snr(params, pulse, tm / params.kappa_m, grid).values)
    files.append(_write(out_dir, "fig2a", cols,
                        np.column_stack(data),
                        {**base_meta, "panel": "a", "curves": "kappa_m*t_m"}, fmt))

    tm_grid = np.linspace(1.0, 50.0, 120)
    r0s = (0.0, 1.0, 1.5, 2.0)
    cols = ["kappa_m_t_m"] + [f"r_nsnr_r0_{r0:g}" for r0 in r0s]
    data = [tm_grid]
    for r0 in r0s:
        p = paper_system(r0=r0)
        vals = [transient_snr(p, pulse, tm / p.kappa_m, np.array([0.0])).values[0]
                for tm in tm_grid]
        data.append(np.asarray(vals))
    files.append(_write(out_dir, "fig2b", cols, np.column_stack(data),
                        {**base_meta, "panel": "b", "omega": "0"}, fmt))

    kicks = (0.0, 1e2, 1e4, 1e6)
    cols = ["omega_over_kappa_m"] + [f"r_nsnr_kick{int(k):d}" for k in kicks]
    data = [omega]
    for kick in kicks:
        p = paper_system(r0=2.0)
        data.append(transient_snr(
            p, FieldPulse(b0_x=FIG2C_PULSE_AREA, b0_z=kick / p.gamma_gyro),
            3.0 / p.kappa_m, grid).values)
    files.append(_write(out_dir, "fig2c", cols, np.column_stack(data),
                        {**base_meta, "panel": "c", "kappa_m_t_m": 3.0,
                         "curves": "gamma_b0_z"}, fmt))

    r0_grid = np.linspace(0.0, 2.5, 126)
    moments = {"fig2d": ("m_p_sq", lambda s: s[3, 3]),
               "fig2e": ("a_x_sq", lambda s: s[0, 0]),
               "fig2f": ("a_x_m_p_sym", lambda s: 2.0 * s[0, 3])}
    for name, (col, pick) in moments.items():
        vals = []
        for r0 in r0_grid:
            sigma = prepared_covariance(paper_system(r0=r0))
            vals.append(pick(sigma))
        files.append(_write(out_dir, name, ["r0", col],
                            np.column_stack([r0_grid, vals]),
                            {**base_meta, "panel": name[-1], "theta0": "pi"}, fmt))
    return files


def _fig3(out_dir, fmt):
    files = []
    params = paper_system(r0=2.0)
    tm = 3.0 / params.kappa_m
    grid = np.linspace(-2.0, 2.0, 41) * params.kappa_m
    plan = calibration_plan(params, bias_b=100.0 / params.gamma_gyro,
                            ref_amplitudes=(FIG3_PULSE_AREA, FIG3_PULSE_AREA),
                            t_m=tm)
    meta = {"figure": "fig3", "pulse_area_Ts": FIG3_PULSE_AREA,
            "bias_gamma_b": 100.0, "noise": "none"}

    def recover(phi, theta):
        b = FIG3_PULSE_AREA
        pulse = FieldPulse(b0_x=b * math.sin(theta) * math.cos(phi),
                           b0_y=b * math.sin(theta) * math.sin(phi),
                           b0_z=b * math.cos(theta))
        measured = synthesize_measurements(plan, pulse, params, grid)
        return reconstruct_field(measured, plan, params)

    phis = np.linspace(0.0, 2.0 * math.pi, 25, endpoint=False)
    rows = []
    for phi in phis:
        res = recover(phi, math.pi / 3.0)
        rows.append([phi, res.phi_hat % (2 * math.pi), math.pi / 3.0, res.theta_hat])
    files.append(_write(out_dir, "fig3a",
                        ["phi_true", "phi_est", "theta_true", "theta_est"],
                        rows, {**meta, "panel": "a", "theta_true": "pi/3"}, fmt))

    thetas = np.linspace(0.05, 0.95, 25) * math.pi
    rows = []
    for theta in thetas:
        res = recover(math.pi / 4.0, theta)
        rows.append([theta, res.theta_hat, math.pi / 4.0, res.phi_hat % (2 * math.pi)])
    files.append(_write(out_dir, "fig3b",
                        ["theta_true", "theta_est", "phi_true", "phi_est"],
                        rows, {**meta, "panel": "b", "phi_true": "pi/4"}, fmt))
    return files


def _ratio_grid(params_for, xs, omega_over_km, squeeze_factor):
    rows = []
    z = np.empty((len(xs), len(omega_over_km)))
    for i, xval in enumerate(xs):
        p = params_for(xval)
        s_r = noise_ratio(p, omega_over_km * p.kappa_m) * squeeze_factor(p)
        z[i] = s_r
        for j, w in enumerate(omega_over_km):
            rows.append([w, xval, s_r[j]])
    return rows, z


def _fig4(out_dir, fmt):
    files = []
    omega = np.linspace(-5.0, 5.0, 201)
    base = paper_system()
    km = base.kappa_m

    def no_squeeze(_):
        return 1.0

    def squeezed_x(_):
        xi_x, _ = xi_factors(SqueezeParams(r=1.726, theta=math.pi))
        return xi_x

    panels = {
        "fig4a": ("g_am_over_kappa_m", np.linspace(0.02, 1.0, 197),
                  lambda g: base.with_(g_am=g * km), no_squeeze),
        "fig4b": ("kappa_a_over_kappa_m", np.linspace(0.05, 2.0, 196),
                  lambda ka: base.with_(kappa_a=ka * km, g_am=0.3 * km), no_squeeze),
        "fig4c": ("g_am_over_kappa_m", np.linspace(0.02, 1.0, 197),
                  lambda g: base.with_(g_am=g * km), squeezed_x),
        "fig4d": ("kappa_a_over_kappa_m", np.linspace(0.05, 2.0, 196),
                  lambda ka: base.with_(kappa_a=ka * km, g_am=0.3 * km), squeezed_x),
    }
    for name, (axis, xs, build, factor) in panels.items():
        meta = {"figure": "fig4", "panel": name[-1], "axis_y": axis,
                "squeeze": "r=1.726 theta=pi" if factor is squeezed_x else "none"}
        if "kappa_a" in axis:
            meta["g_am_over_kappa_m"] = 0.3
        rows, z = _ratio_grid(build, xs, omega, factor)
        files.append(_write(out_dir, name, ["omega_over_kappa_m", axis, "s_r"],
                            rows, meta, fmt))
        polylines = iso_contours(omega, xs, z, 1.0)
        files.append(_write(out_dir, f"{name}_contour",
                            ["polyline_id", "omega_over_kappa_m", axis],
                            _contour_rows(polylines),
                            {**meta, "level": "s_r = 1"}, fmt))
    return files


SIGNAL_PSD_DEFAULT = 1e-24  # T^2/Hz


def _fig5(out_dir, fmt):
    files = []
    base = paper_system()
    km = base.kappa_m
    g_opt = optimal_coupling(base)

    omega = np.linspace(-3.0, 3.0, 601)
    rs = (0.0, 0.5, 1.0, 1.5)
    cols = ["omega_over_kappa_m"] + [f"r_ssnr_r{r:g}" for r in rs]
    data = [omega]
    for r in rs:
        p = paper_system(r=r, theta=math.pi, g_am=g_opt)
        data.append(stationary_snr(p, SIGNAL_PSD_DEFAULT, omega * km).values)
    files.append(_write(out_dir, "fig5a", cols, np.column_stack(data),
                        {"figure": "fig5", "panel": "a", "g_am": "sqrt(ka*km)/2",
                         "signal_psd_T2_per_Hz": SIGNAL_PSD_DEFAULT,
                         "theta": "pi"}, fmt))

    temps = np.linspace(1e-3, 0.5, 121)
    rgrid = np.linspace(0.0, 2.0, 121)
    rows = []
    z = np.empty((len(rgrid), len(temps)))
    for i, r in enumerate(rgrid):
        for j, t in enumerate(temps):
            p = paper_system(r=r, theta=math.pi, temperature=t)
            val = stationary_snr(p, SIGNAL_PSD_DEFAULT, np.array([0.0])).values[0]
            z[i, j] = val
            rows.append([t, r, val])
    meta = {"figure": "fig5", "panel": "b", "omega": "0",
            "g_am": "2*pi*1.77e5 rad/s",
            "signal_psd_T2_per_Hz": SIGNAL_PSD_DEFAULT, "theta": "pi"}
    files.append(_write(out_dir, "fig5b", ["temperature_K", "r", "r_ssnr"],
                        rows, meta, fmt))
    polylines = iso_contours(temps, rgrid, z, 1.0)
    files.append(_write(out_dir, "fig5b_contour", ["polyline_id", "temperature_K", "r"],
                        _contour_rows(polylines), {**meta, "level": "r_ssnr = 1"}, fmt))
    return files


FIGURES = {"fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5}


def figure_data(figure_id: str, out_dir: str, fmt: str = "csv") -> list:
    """Emit the per-panel datasets behind one of the built-in figures."""
    if figure_id not in FIGURES:
        raise ConfigError(f"unknown figure id {figure_id!r} (choose from {sorted(FIGURES)})")
    return FIGURES[figure_id](out_dir, fmt)
