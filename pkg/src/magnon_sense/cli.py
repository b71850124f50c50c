"""Command-line entry point.

``magnon-sense <task> --config <path> [--out <dir>] [--seed <u64>]
[--format csv|json]`` runs a scenario config; ``magnon-sense figure-data
<fig-id> [--out <dir>]`` emits the built-in figure datasets.  Exit codes:
0 success, 2 configuration/schema error, 3 physics-domain error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__, io, presets
from .config import ScenarioConfig, load_config
from .errors import ConfigError, PhysicsError
from .model import FieldPulse, SqueezeParams
from .sensing import (McNoise, calibration_plan, reconstruct_field,
                      stationary_snr, synthesize_measurements, transient_snr)
from .spectra import (nsphere_psd, noise_ratio, stationary_psd,
                      transient_noise_psd, xi_factors)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_IO = 4


def _metadata(cfg: ScenarioConfig, seed: int) -> dict:
    return {
        "tool": f"magnon-sense v{__version__}",
        "task": cfg.task,
        "config-hash": cfg.config_hash,
        "seed": seed,
    }


def _out_path(cfg: ScenarioConfig, out_dir: str, fmt: str) -> str:
    name = cfg.output_path or f"{cfg.task}.{ 'json' if fmt == 'json' else 'csv'}"
    return f"{out_dir}/{name}"


def _spectrum_rows(series):
    columns = ["omega_rad_per_s", "psd"]
    arrays = [series.omega, series.values]
    for name in sorted(series.components):
        columns.append(name)
        arrays.append(series.components[name])
    return columns, np.column_stack(arrays)


def _run_transient(cfg, seed, out_dir, fmt):
    block = cfg.blocks["transient"]
    params = cfg.system
    grid = cfg.grid.omegas(params)
    t_m = block["kappa_m_t_m"] / params.kappa_m
    series = transient_noise_psd(params, block["gamma_b0_z"], t_m, grid,
                                 channel=block["channel"], units=block["units"])
    columns, rows = _spectrum_rows(series)
    meta = _metadata(cfg, seed)
    meta.update({"channel": block["channel"], "units": block["units"],
                 "kappa_m_t_m": block["kappa_m_t_m"]})
    path = io.write_table(_out_path(cfg, out_dir, fmt), columns, rows, meta, fmt)
    return f"transient spectrum: {grid.size} points, channel {block['channel']} -> {path}"


def _run_steady(cfg, seed, out_dir, fmt):
    block = cfg.blocks["stationary"]
    params = cfg.system
    grid = cfg.grid.omegas(params)
    series = stationary_psd(params, grid, channel=block["channel"],
                            signal_psd=block["signal_psd"], units=block["units"])
    columns, rows = _spectrum_rows(series)
    meta = _metadata(cfg, seed)
    meta.update({"channel": block["channel"], "units": block["units"]})
    path = io.write_table(_out_path(cfg, out_dir, fmt), columns, rows, meta, fmt)
    return f"stationary spectrum: {grid.size} points, channel {block['channel']} -> {path}"


def _run_noise_ratio(cfg, seed, out_dir, fmt):
    params = cfg.system
    grid = cfg.grid.omegas(params)
    s_r = noise_ratio(params, grid)
    columns = ["omega_rad_per_s", "omega_over_kappa_m", "s_r"]
    arrays = [grid, grid / params.kappa_m, s_r]
    if params.bath_squeeze.r > 0:
        xi_x, xi_y = xi_factors(params.bath_squeeze)
        columns += ["s_r_x", "s_r_y"]
        arrays += [s_r * xi_x, s_r * xi_y]
    path = io.write_table(_out_path(cfg, out_dir, fmt), columns,
                          np.column_stack(arrays), _metadata(cfg, seed), fmt)
    return f"noise ratio: {grid.size} points -> {path}"


def _run_nsphere(cfg, seed, out_dir, fmt):
    block = cfg.blocks["stationary"]
    params = cfg.system
    grid = cfg.grid.omegas(params)
    series = nsphere_psd(params, grid, channel=block["channel"],
                         signal_psd=block["signal_psd"], units=block["units"])
    columns, rows = _spectrum_rows(series)
    meta = _metadata(cfg, seed)
    meta.update({"n_spheres": params.n_spheres, "channel": block["channel"]})
    path = io.write_table(_out_path(cfg, out_dir, fmt), columns, rows, meta, fmt)
    return f"n-sphere spectrum (N={params.n_spheres}): {grid.size} points -> {path}"


def _run_snr(cfg, seed, out_dir, fmt):
    block = cfg.blocks["snr"]
    params = cfg.system
    grid = cfg.grid.omegas(params)
    if block["mode"] == "transient":
        t_m = block["kappa_m_t_m"] / params.kappa_m
        result = transient_snr(params, block["pulse"], t_m, grid,
                               channel=block["channel"])
        label = "r_nsnr"
    else:
        result = stationary_snr(params, block["signal_psd"], grid,
                                channel=block["channel"])
        label = "r_ssnr"
    columns = ["omega_rad_per_s", "omega_over_kappa_m", label]
    rows = np.column_stack([grid, grid / params.kappa_m, result.values])
    meta = _metadata(cfg, seed)
    meta.update({"mode": block["mode"], "channel": block["channel"]})
    path = io.write_table(_out_path(cfg, out_dir, fmt), columns, rows, meta, fmt)
    return f"{block['mode']} SNR: {grid.size} points, channel {block['channel']} -> {path}"


def _run_reconstruct(cfg, seed, out_dir, fmt, measured_dir=None):
    block = cfg.blocks["reconstruct"]
    params = cfg.system
    grid = cfg.grid.omegas(params)
    t_m = block["kappa_m_t_m"] / params.kappa_m
    plan = calibration_plan(
        params, bias_b=block["bias"],
        ref_amplitudes=(block["ref_x"], block["ref_y"]), t_m=t_m,
        band_half_width=block["band_half_width_over_kappa_m"] * params.kappa_m)
    if measured_dir is not None:
        measured = {label: io.read_spectrum(f"{measured_dir}/{label}.csv")
                    for label in plan.labels()}
    else:
        noise = None
        if block["noise"] == "monte-carlo":
            noise = McNoise(n_traj=block["n_traj"])
        measured = synthesize_measurements(plan, block["pulse"], params, grid,
                                           noise=noise, seed=seed)
    result = reconstruct_field(measured, plan, params)
    columns = ["b_hat_x_Ts", "b_hat_y_Ts", "b_hat_z_Ts", "gamma_b0_z_hat",
               "phi_hat_rad", "theta_hat_rad", "dd_flatness", "band_points"]
    row = [*result.b_hat, result.gamma_b0_z_hat, result.phi_hat,
           result.theta_hat, result.diagnostics["dd_flatness"],
           result.diagnostics["band_points"]]
    meta = _metadata(cfg, seed)
    meta.update({"noise": block["noise"], "kappa_m_t_m": block["kappa_m_t_m"]})
    path = io.write_table(_out_path(cfg, out_dir, fmt), columns, [row], meta, fmt)
    return ("reconstruction: phi=%.4f rad theta=%.4f rad -> %s"
            % (result.phi_hat, result.theta_hat, path))


def _set_field(params, name, value):
    if name == "bath_squeeze.r":
        return params.with_(bath_squeeze=SqueezeParams(value, params.bath_squeeze.theta))
    if name == "bath_squeeze.theta":
        return params.with_(bath_squeeze=SqueezeParams(params.bath_squeeze.r, value))
    if name == "pre_squeeze.r":
        return params.with_(pre_squeeze=SqueezeParams(value, params.pre_squeeze.theta))
    if name == "pre_squeeze.theta":
        return params.with_(pre_squeeze=SqueezeParams(params.pre_squeeze.r, value))
    return params.with_(**{name: value})


def _run_sweep(cfg, seed, out_dir, fmt):
    block = cfg.blocks["sweep"]
    axes = block["axes"]
    base = cfg.system

    observable = block["observable"]
    value_columns = {
        "stationary-psd": ["psd_total", "psd_magnon", "psd_cavity"],
        "nsphere-psd": ["psd_total", "psd_magnon", "psd_cavity"],
        "stationary-snr": ["r_ssnr"],
        "transient-snr": ["r_nsnr"],
        "noise-ratio": ["s_r"],
    }[observable]

    def evaluate(params, kappa_m_t_m):
        omega = np.array([block["omega_over_kappa_m"] * params.kappa_m])
        if observable in ("stationary-psd", "nsphere-psd"):
            fn = stationary_psd if observable == "stationary-psd" else nsphere_psd
            s = fn(params, omega, channel=block["channel"],
                   signal_psd=block["signal_psd"])
            return [s.values[0], s.components["magnon"][0], s.components["cavity"][0]]
        if observable == "stationary-snr":
            return [stationary_snr(params, block["signal_psd"], omega,
                                   channel=block["channel"]).values[0]]
        if observable == "transient-snr":
            t_m = kappa_m_t_m / params.kappa_m
            return [transient_snr(params, block["pulse"], t_m, omega,
                                  channel=block["channel"]).values[0]]
        return [noise_ratio(params, omega)[0]]

    axis_names = [axis["field"] for axis in axes]
    rows = []
    grids = [axis["values"] for axis in axes]
    indices = [range(len(g)) for g in grids]
    import itertools
    for combo in itertools.product(*indices):
        params = base
        kappa_m_t_m = block["kappa_m_t_m"]
        coords = []
        for axis_i, value_i in enumerate(combo):
            name = axis_names[axis_i]
            value = grids[axis_i][value_i]
            coords.append(value)
            if name == "kappa_m_t_m":
                kappa_m_t_m = value
            else:
                params = _set_field(params, name, value)
        rows.append(coords + evaluate(params, kappa_m_t_m))

    columns = axis_names + value_columns
    meta = _metadata(cfg, seed)
    meta.update({"observable": observable,
                 "omega_over_kappa_m": block["omega_over_kappa_m"]})
    path = io.write_table(_out_path(cfg, out_dir, fmt), columns, rows, meta, fmt)
    return f"sweep over {axis_names}: {len(rows)} rows -> {path}"


_RUNNERS = {
    "transient-spectrum": _run_transient,
    "steady-spectrum": _run_steady,
    "noise-ratio": _run_noise_ratio,
    "nsphere": _run_nsphere,
    "snr": _run_snr,
    "sweep": _run_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magnon-sense",
        description="Cavity-magnon magnetometry spectra, SNRs, and reconstruction")
    sub = parser.add_subparsers(dest="command", required=True)
    task_names = list(_RUNNERS) + ["reconstruct"]
    for task in task_names:
        p = sub.add_parser(task, help=f"run a {task} scenario config")
        p.add_argument("--config", required=True, help="path to the TOML scenario")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        if task == "reconstruct":
            p.add_argument("--measured", default=None,
                           help="directory of measured spectra (<label>.csv) to "
                                "ingest instead of synthesizing")
    fig = sub.add_parser("figure-data", help="emit built-in figure datasets")
    fig.add_argument("figure", choices=sorted(presets.FIGURES))
    fig.add_argument("--out", default=".", help="output directory")
    fig.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "figure-data":
            files = presets.figure_data(args.figure, args.out, args.format)
            print(f"figure-data {args.figure}: wrote {len(files)} files to {args.out}")
            return EXIT_OK
        cfg = load_config(args.config)
        if cfg.task != args.command:
            raise ConfigError(
                f"config task {cfg.task!r} does not match command {args.command!r}")
        seed = cfg.seed if args.seed is None else args.seed
        fmt = args.format or cfg.output_format
        if args.command == "reconstruct":
            summary = _run_reconstruct(cfg, seed, args.out, fmt,
                                       measured_dir=args.measured)
        else:
            summary = _RUNNERS[args.command](cfg, seed, args.out, fmt)
        print(summary)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicsError as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
