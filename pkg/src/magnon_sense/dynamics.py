"""Linear quadrature dynamics of the coupled cavity-magnon system.

State vector ordering is (a_x, a_p, m_x, m_p).  The drift/diffusion pair
defines d(sigma)/dt = A sigma + sigma A^T + D for the symmetrized covariance;
the trajectory simulator realizes the same dynamics as an Ito SDE with the
input-output relation a_out = sqrt(kappa_a) a - a_in applied per step.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, expm

from .errors import PhysicsError
from .model import FieldPulse, SqueezeParams, SystemParams, bath_correlators
from .series import SpectrumSeries

QUADRATURES = ("a_x", "a_p", "m_x", "m_p")

_WORKERS_ENV = "MAGNON_SENSE_WORKERS"


def build_drift(params: SystemParams) -> np.ndarray:
    """Drift matrix of the noise-free quadrature dynamics.

    The longitudinal delta-pulse enters as signal (an instantaneous jump), not
    as part of the drift.
    """
    ka, km, g = params.kappa_a, params.kappa_m, params.g_am
    return np.array([
        [-ka / 2, 0.0, 0.0, g],
        [0.0, -ka / 2, -g, 0.0],
        [0.0, g, -km / 2, 0.0],
        [-g, 0.0, 0.0, -km / 2],
    ])


def input_noise_blocks(params: SystemParams, sq: SqueezeParams) -> tuple[np.ndarray, np.ndarray]:
    """Symmetrized white-noise covariances (per unit time) of the cavity and
    magnon input quadratures, for a cavity bath squeezed by `sq`."""
    n_q, re_m, im_m = bath_correlators(sq, params.n_bar_a)
    v_cav = np.array([
        [n_q + 0.5 + re_m, im_m],
        [im_m, n_q + 0.5 - re_m],
    ])
    v_mag = (params.n_bar_m + 0.5) * np.eye(2)
    return v_cav, v_mag


def build_diffusion(params: SystemParams, sq: SqueezeParams) -> np.ndarray:
    """Diffusion matrix D: kappa-weighted input-noise covariances, block diagonal."""
    v_cav, v_mag = input_noise_blocks(params, sq)
    d = np.zeros((4, 4))
    d[:2, :2] = params.kappa_a * v_cav
    d[2:, 2:] = params.kappa_m * v_mag
    return d


def is_hurwitz(a: np.ndarray) -> bool:
    return bool(np.all(np.linalg.eigvals(a).real < 0))


@dataclass(frozen=True)
class LinearSystem:
    """Drift + diffusion pair, optionally with a deterministic drive term.

    For the delta-pulse protocol the drive is realized as an instantaneous
    state jump at t = 0 (see `pulse_jump`), so `drive` stays None.
    """

    drift: np.ndarray
    diffusion: np.ndarray
    drive: object = None

    def __post_init__(self):
        a = np.asarray(self.drift, dtype=float)
        d = np.asarray(self.diffusion, dtype=float)
        object.__setattr__(self, "drift", a)
        object.__setattr__(self, "diffusion", d)
        if not is_hurwitz(a):
            raise PhysicsError("drift matrix is not Hurwitz; no stable dynamics")
        if not np.allclose(d, d.T):
            raise PhysicsError("diffusion matrix must be symmetric")
        scale = np.linalg.norm(d)
        if scale > 0 and np.linalg.eigvalsh(d).min() < -1e-12 * scale:
            raise PhysicsError("diffusion matrix must be positive semidefinite")


def linear_system(params: SystemParams, sq: SqueezeParams | None = None) -> LinearSystem:
    sq = params.bath_squeeze if sq is None else sq
    return LinearSystem(build_drift(params), build_diffusion(params, sq))


@dataclass(frozen=True)
class CovarianceState:
    """Symmetrized quadrature covariance (vacuum = identity/2) at a time."""

    sigma: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        object.__setattr__(self, "sigma", s)
        if s.shape != (4, 4) or not np.allclose(s, s.T, atol=1e-9 * max(1.0, abs(s).max())):
            raise PhysicsError("covariance must be a symmetric 4x4 matrix")
        # per-mode uncertainty bound det(block) >= 1/4
        for i in (0, 2):
            block = s[i:i + 2, i:i + 2]
            if np.linalg.det(block) < 0.25 - 1e-9:
                raise PhysicsError("covariance violates the mode uncertainty bound")


def steady_covariance(drift: np.ndarray, diffusion: np.ndarray) -> CovarianceState:
    """Stationary covariance from A sigma + sigma A^T + D = 0.

    Solved as a dense linear system in the 16 vectorized unknowns; the
    residual is checked against 1e-10 * ||D||.
    """
    a = np.asarray(drift, dtype=float)
    d = np.asarray(diffusion, dtype=float)
    if not is_hurwitz(a):
        raise PhysicsError("no stationary state: drift matrix is not Hurwitz")
    n = a.shape[0]
    eye = np.eye(n)
    coeff = np.kron(eye, a) + np.kron(a, eye)
    sigma = np.linalg.solve(coeff, -d.reshape(-1)).reshape(n, n)
    sigma = 0.5 * (sigma + sigma.T)
    residual = np.linalg.norm(a @ sigma + sigma @ a.T + d)
    if residual > 1e-10 * max(np.linalg.norm(d), 1e-300):
        raise PhysicsError(f"Lyapunov solve residual too large: {residual:.3e}")
    return CovarianceState(sigma=sigma, time=math.inf)


def evolve_covariance(drift: np.ndarray, diffusion: np.ndarray,
                      sigma0: CovarianceState, t: float) -> CovarianceState:
    """Propagate the covariance forward by t >= 0.

    Uses the block matrix exponential of [[A, D], [0, -A^T]], which yields
    both e^{At} and the accumulated noise integral exactly; this route is
    independent of the Lyapunov solver so the two can cross-check each other.
    """
    if t < 0:
        raise PhysicsError(f"evolution time must be >= 0, got {t}")
    if t == 0:
        return CovarianceState(sigma=sigma0.sigma.copy(), time=sigma0.time)
    a = np.asarray(drift, dtype=float)
    d = np.asarray(diffusion, dtype=float)
    # the noise-integral product H @ e^{A^T dt} amplifies rounding like
    # e^{rate * dt}, so keep each substep's growth small
    rate = max(abs(np.linalg.eigvals(a).real).max(), 1e-300)
    n_sub = max(1, int(math.ceil(t * rate / 5.0)))
    dt = t / n_sub
    block = np.zeros((8, 8))
    block[:4, :4] = a
    block[:4, 4:] = d
    block[4:, 4:] = -a.T
    eb = expm(block * dt)
    f1 = eb[:4, :4]          # e^{A dt}
    g = eb[:4, 4:] @ f1.T    # integral of e^{As} D e^{A^T s} ds over the step
    sigma = sigma0.sigma
    for _ in range(n_sub):
        sigma = f1 @ sigma @ f1.T + g
        sigma = 0.5 * (sigma + sigma.T)
    t0 = sigma0.time if math.isfinite(sigma0.time) else 0.0
    return CovarianceState(sigma=sigma, time=t0 + t)


def pulse_jump(params: SystemParams, pulse: FieldPulse,
               arrival_phase: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Instantaneous effect of the delta pulse at t = 0.

    Returns (displacement, kick): the mean displacement of the quadrature
    vector and the linearized map I + gamma*B0_z*J applied to the pre-jump
    state (J rotates m_x into m_p at unit rate).  `arrival_phase` is the
    magnon-frame phase omega_m * t0 of the pulse arrival.
    """
    eps = params.epsilon_b
    s, c = math.sin(arrival_phase), math.cos(arrival_phase)
    disp = np.array([
        0.0,
        0.0,
        -math.sqrt(2.0) * eps * (pulse.b0_x * s + pulse.b0_y * c),
        +math.sqrt(2.0) * eps * (pulse.b0_x * c - pulse.b0_y * s),
    ])
    beta = pulse.gamma_b0_z(params)
    kick = np.eye(4)
    kick[2, 3] = beta
    kick[3, 2] = -beta
    return disp, kick


def _worker_count() -> int:
    raw = os.environ.get(_WORKERS_ENV, "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise PhysicsError(f"{_WORKERS_ENV} must be an integer, got {raw!r}")
    return 1


def _simulate_block(rng, n_block, n_steps, dt, a_disc, l_state, l_cav, l_mag,
                    sqrt_ka, sqrt_km, disp, kick, out_index):
    """One block of trajectories; returns the (n_steps, n_block) output record."""
    x = rng.standard_normal((n_block, 4)) @ l_state.T
    x = x @ kick.T + disp
    out = np.empty((n_steps, n_block))
    divergence_guard = 1e12 * (1.0 + abs(disp).max() + abs(l_state).max())
    for k in range(n_steps):
        d_cav = rng.standard_normal((n_block, 2)) @ l_cav.T
        d_mag = rng.standard_normal((n_block, 2)) @ l_mag.T
        # output record uses the pre-update state and the same bath increment
        out[k] = sqrt_ka * x[:, out_index] * dt - d_cav[:, out_index]
        x = x @ a_disc.T
        x[:, 0] += sqrt_ka * d_cav[:, 0]
        x[:, 1] += sqrt_ka * d_cav[:, 1]
        x[:, 2] += sqrt_km * d_mag[:, 0]
        x[:, 3] += sqrt_km * d_mag[:, 1]
        if k % 512 == 511 and abs(x).max() > divergence_guard:
            raise PhysicsError(
                "trajectory divergence detected; reduce the integration step "
                "(increase step_divisor)")
    return out, x


def monte_carlo_output_spectrum(params: SystemParams, pulse: FieldPulse, t_m: float,
                                omega_grid, n_traj: int, seed: int,
                                channel: str = "x", step_divisor: int = 100,
                                horizon: float = 8.0, block_size: int = 1024,
                                arrival_phase: float = 0.0) -> SpectrumSeries:
    """Trajectory estimate of the measurement-window output PSD.

    Simulates the quadrature Langevin equations by Euler-Maruyama from initial
    states drawn out of the pre-squeeze steady covariance, applies the pulse
    jump at t = 0, forms the exponentially windowed finite-time transform of
    the output quadrature (window rate 1/(2 t_m), matching the closed-form
    spectrum), and averages periodograms.  Values are referred to field units
    through the same transfer normalization as the closed form.  Deterministic
    for a given (seed, n_traj, step_divisor, block_size) regardless of worker
    count: per-block substreams and fixed-order reduction.
    """
    if n_traj < 1:
        raise PhysicsError(f"n_traj must be >= 1, got {n_traj}")
    if t_m <= 0:
        raise PhysicsError(f"measurement time must be positive, got {t_m}")
    if channel not in ("x", "y"):
        raise PhysicsError(f"channel must be 'x' or 'y', got {channel!r}")
    if step_divisor < 50:
        raise PhysicsError("step_divisor below 50 violates the documented accuracy floor")
    omega = np.asarray(omega_grid, dtype=float)

    a = build_drift(params)
    sigma_s = steady_covariance(a, build_diffusion(params, params.pre_squeeze)).sigma
    v_cav, v_mag = input_noise_blocks(params, params.bath_squeeze)

    dt = min(1.0 / params.kappa_a, 1.0 / params.kappa_m, 1.0 / params.g_am) / step_divisor
    n_steps = int(math.ceil(horizon * t_m / dt))
    a_disc = np.eye(4) + a * dt
    l_state = cholesky(sigma_s + 1e-30 * np.eye(4), lower=True)
    l_cav = cholesky(v_cav * dt + 1e-300 * np.eye(2), lower=True)
    l_mag = cholesky(v_mag * dt + 1e-300 * np.eye(2), lower=True)
    disp, kick = pulse_jump(params, pulse, arrival_phase)
    sqrt_ka, sqrt_km = math.sqrt(params.kappa_a), math.sqrt(params.kappa_m)
    out_index = 0 if channel == "x" else 1

    times = np.arange(n_steps) * dt
    window = np.exp((1j * omega[:, None] - 1.0 / (2.0 * t_m)) * times[None, :]) / math.sqrt(t_m)

    n_blocks = int(math.ceil(n_traj / block_size))
    sizes = [block_size] * (n_blocks - 1) + [n_traj - block_size * (n_blocks - 1)]
    streams = np.random.SeedSequence(seed).spawn(n_blocks)

    def run_block(i):
        rng = np.random.default_rng(streams[i])
        out, x_end = _simulate_block(rng, sizes[i], n_steps, dt, a_disc, l_state,
                                     l_cav, l_mag, sqrt_ka, sqrt_km, disp, kick,
                                     out_index)
        xw = window @ out
        p = np.abs(xw) ** 2
        return p.sum(axis=1), (p ** 2).sum(axis=1), xw.sum(axis=1)

    workers = _worker_count()
    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run_block, range(n_blocks)))
    else:
        partials = [run_block(i) for i in range(n_blocks)]

    # fixed-order pairwise reduction keeps results independent of scheduling
    sum_p = np.sum([p[0] for p in partials], axis=0)
    sum_p2 = np.sum([p[1] for p in partials], axis=0)
    sum_x = np.sum([p[2] for p in partials], axis=0)

    mean_p = sum_p / n_traj
    mean_x = sum_x / n_traj
    se_p = np.sqrt(np.maximum(sum_p2 / n_traj - mean_p ** 2, 0.0) / n_traj)

    lam = -1j * omega + 1.0 / (2.0 * t_m)
    denom = (lam + params.kappa_a / 2.0) * (lam + params.kappa_m / 2.0) + params.g_am ** 2
    norm = np.abs(denom) ** 2 / (2.0 * params.kappa_a * params.g_am ** 2 * params.epsilon_b ** 2)

    total = mean_p * norm
    signal = np.abs(mean_x) ** 2 * norm
    noise = np.maximum(total - signal, 0.0)
    mean_field = mean_x * np.sqrt(norm)
    return SpectrumSeries(
        omega=omega, values=total, channel=channel, units="tesla2_per_hertz",
        components={
            "signal": signal,
            "noise": noise,
            "mean_re": mean_field.real,
            "mean_im": mean_field.imag,
        },
        stderr=se_p * norm,
    )


def monte_carlo_covariance(params: SystemParams, sq: SqueezeParams, t: float,
                           n_traj: int, seed: int,
                           sigma0: CovarianceState | None = None) -> np.ndarray:
    """Sample covariance of the quadratures after evolving for time t.

    Cross-check utility for the Lyapunov/propagator routes; initial states are
    drawn from `sigma0` (pre-squeeze steady state when omitted).
    """
    if t < 0:
        raise PhysicsError(f"evolution time must be >= 0, got {t}")
    a = build_drift(params)
    if sigma0 is None:
        sigma0 = steady_covariance(a, build_diffusion(params, params.pre_squeeze))
    v_cav, v_mag = input_noise_blocks(params, sq)
    dt = min(1.0 / params.kappa_a, 1.0 / params.kappa_m, 1.0 / params.g_am) / 100
    n_steps = int(math.ceil(t / dt)) if t > 0 else 0
    a_disc = np.eye(4) + a * dt
    l_state = cholesky(sigma0.sigma + 1e-30 * np.eye(4), lower=True)
    l_cav = cholesky(v_cav * dt + 1e-300 * np.eye(2), lower=True)
    l_mag = cholesky(v_mag * dt + 1e-300 * np.eye(2), lower=True)
    sqrt_ka, sqrt_km = math.sqrt(params.kappa_a), math.sqrt(params.kappa_m)

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    x = rng.standard_normal((n_traj, 4)) @ l_state.T
    for _ in range(n_steps):
        d_cav = rng.standard_normal((n_traj, 2)) @ l_cav.T
        d_mag = rng.standard_normal((n_traj, 2)) @ l_mag.T
        x = x @ a_disc.T
        x[:, 0] += sqrt_ka * d_cav[:, 0]
        x[:, 1] += sqrt_ka * d_cav[:, 1]
        x[:, 2] += sqrt_km * d_mag[:, 0]
        x[:, 3] += sqrt_km * d_mag[:, 1]
    xc = x - x.mean(axis=0)
    return (xc.T @ xc) / (n_traj - 1)
