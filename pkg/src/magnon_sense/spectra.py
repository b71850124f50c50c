"""Closed-form output noise spectra and noise ratios.

Covers the finite-measurement-time (transient) spectrum with its kernel
functions, the stationary decomposition into magnon and cavity-added noise,
the squeezed-reservoir scaling of the cavity term, and the N-sphere
(collective bright mode) results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import PhysicsError
from .dynamics import build_diffusion, build_drift, steady_covariance
from .model import SqueezeParams, SystemParams
from .series import SpectrumSeries


def xi_factors(sq: SqueezeParams) -> tuple[float, float]:
    """Squeezed-bath quadrature noise factors (Xi_x, Xi_y).

    Xi_{x,y} = cosh(2r) +/- cos(theta) sinh(2r); the product is
    cosh^2(2r) - cos^2(theta) sinh^2(2r) >= 1 with equality only at
    theta in {0, pi}.
    """
    c, s = math.cosh(2 * sq.r), math.sinh(2 * sq.r)
    ct = math.cos(sq.theta)
    return c + ct * s, c - ct * s


def cavity_response(params: SystemParams, omega, n_coll: int = 1) -> np.ndarray:
    """Complex response A(omega) whose magnitude sets the cavity-added noise.

    A = [(omega - i kappa_a/2)(omega + i kappa_m/2) - N g^2] / (sqrt(2) g);
    `n_coll` > 1 gives the collective (bright-mode) variant.
    """
    w = np.asarray(omega, dtype=float)
    ka, km, g = params.kappa_a, params.kappa_m, params.g_am
    return ((w - 1j * ka / 2) * (w + 1j * km / 2) - n_coll * g ** 2) / (math.sqrt(2) * g)


@dataclass(frozen=True)
class TransientKernel:
    """Frequency kernels of the finite-window spectrum.

    alpha(omega) weights the cavity quadrature inside the initial-state form;
    kcal(omega) is the cavity filter entering the stationary part; xi_x/xi_y
    are the sensing-bath squeeze factors.
    """

    alpha: np.ndarray
    kcal: np.ndarray
    xi_x: float
    xi_y: float


def transient_kernel(params: SystemParams, t_m: float, omega) -> TransientKernel:
    if t_m <= 0:
        raise PhysicsError(f"measurement time must be positive, got {t_m}")
    w = np.asarray(omega, dtype=float)
    ka, km, g = params.kappa_a, params.kappa_m, params.g_am
    alpha = (-1j * w + 1.0 / (2.0 * t_m) + km / 2.0) / g
    kcal = np.abs(4 * g ** 2 + (1.0 / t_m - 2j * w - ka) * (1.0 / t_m - 2j * w + km)) ** 2 \
        / (16.0 * g ** 2 * ka)
    xi_x, xi_y = xi_factors(params.bath_squeeze)
    return TransientKernel(alpha=alpha, kcal=kcal, xi_x=xi_x, xi_y=xi_y)


def stationary_kernel(params: SystemParams, omega) -> np.ndarray:
    """Infinite-window limit of the cavity filter: 2 |A(omega)|^2 / kappa_a."""
    return 2.0 * np.abs(cavity_response(params, omega)) ** 2 / params.kappa_a


@lru_cache(maxsize=128)
def _prepared_covariance_cached(params: SystemParams, prep: SqueezeParams) -> np.ndarray:
    a = build_drift(params)
    return steady_covariance(a, build_diffusion(params, prep)).sigma


def prepared_covariance(params: SystemParams, prep: SqueezeParams | None = None) -> np.ndarray:
    """Steady covariance of the preparation stage (bath squeezed by `prep`)."""
    prep = params.pre_squeeze if prep is None else prep
    return _prepared_covariance_cached(params, prep)


def measurement_coefficients(alpha: np.ndarray, gamma_b0_z: float, channel: str) -> np.ndarray:
    """Coefficient vector c of the filtered initial-state combination.

    Channel x measures m_p - gamma*B0_z * m_x + alpha * a_x; channel y
    measures m_x + gamma*B0_z * m_p + alpha * a_p.
    """
    alpha = np.atleast_1d(alpha)
    c = np.zeros((alpha.size, 4), dtype=complex)
    if channel == "x":
        c[:, 0] = alpha
        c[:, 2] = -gamma_b0_z
        c[:, 3] = 1.0
    elif channel == "y":
        c[:, 1] = alpha
        c[:, 2] = 1.0
        c[:, 3] = gamma_b0_z
    else:
        raise PhysicsError(f"channel must be 'x' or 'y', got {channel!r}")
    return c


def initial_state_form(params: SystemParams, gamma_b0_z: float, t_m: float, omega,
                       channel: str = "x", prep: SqueezeParams | None = None) -> np.ndarray:
    """Quadratic form c^dagger Sigma_s c of the prepared state (per frequency).

    This equals half the symmetrized moment of the filtered combination.
    """
    kern = transient_kernel(params, t_m, omega)
    c = measurement_coefficients(kern.alpha, gamma_b0_z, channel)
    sigma = prepared_covariance(params, prep)
    return np.einsum("wi,ij,wj->w", c.conj(), sigma, c).real


def _apply_units(values: np.ndarray, params: SystemParams, units: str) -> np.ndarray:
    if units == "tesla2_per_hertz":
        return values
    if units == "epsilonb_normalized":
        return values * params.epsilon_b ** 2
    raise PhysicsError(f"unknown units {units!r}")


def transient_noise_psd(params: SystemParams, gamma_b0_z: float, t_m: float,
                        omega_grid, channel: str = "x",
                        prep: SqueezeParams | None = None,
                        units: str = "tesla2_per_hertz") -> SpectrumSeries:
    """Finite-window output noise PSD referred to field units.

    The initial-state term decays as 1/t_m; the stationary part carries the
    cavity filter kcal with the sensing-stage squeeze factor Xi.  Both noise
    terms are scaled by the cavity-bath occupancy factor (1/2 + n_a); on
    resonance at equal temperature this coincides with the magnon occupancy,
    and the stationary-limit consistency test tracks the difference.
    """
    w = np.asarray(omega_grid, dtype=float)
    kern = transient_kernel(params, t_m, w)
    q = initial_state_form(params, gamma_b0_z, t_m, w, channel, prep)
    eps2 = params.epsilon_b ** 2
    occ = 0.5 + params.n_bar_a
    xi = kern.xi_x if channel == "x" else kern.xi_y
    transient = q / (2.0 * eps2 * t_m)
    magnon = np.full_like(w, occ * params.kappa_m / (2.0 * eps2))
    cavity = occ * kern.kcal * xi / (2.0 * eps2)
    total = transient + magnon + cavity
    return SpectrumSeries(
        omega=w,
        values=_apply_units(total, params, units),
        channel=channel, units=units,
        components={
            "transient": _apply_units(transient, params, units),
            "magnon": _apply_units(magnon, params, units),
            "cavity": _apply_units(cavity, params, units),
        },
    )


def stationary_psd(params: SystemParams, omega_grid, channel: str = "x",
                   signal_psd: float = 0.0,
                   units: str = "tesla2_per_hertz") -> SpectrumSeries:
    """Stationary output PSD: signal + magnon input noise + cavity-added noise.

    The cavity term carries the squeezed-reservoir factor Xi (1 without
    squeezing); the positive sign of Xi_x applies to the x channel.
    """
    if signal_psd < 0:
        raise PhysicsError(f"signal PSD must be >= 0, got {signal_psd}")
    w = np.asarray(omega_grid, dtype=float)
    eps2 = params.epsilon_b ** 2
    xi_x, xi_y = xi_factors(params.bath_squeeze)
    xi = xi_x if channel == "x" else xi_y
    magnon = np.full_like(w, params.kappa_m * (params.n_bar_m + 0.5) / (2.0 * eps2))
    cavity = xi * np.abs(cavity_response(params, w)) ** 2 * (params.n_bar_a + 0.5) \
        / (params.kappa_a * eps2)
    signal = np.full_like(w, float(signal_psd))
    total = signal + magnon + cavity
    return SpectrumSeries(
        omega=w,
        values=_apply_units(total, params, units),
        channel=channel, units=units,
        components={
            "signal": _apply_units(signal, params, units),
            "magnon": _apply_units(magnon, params, units),
            "cavity": _apply_units(cavity, params, units),
        },
    )


def noise_ratio(params: SystemParams, omega) -> np.ndarray:
    """Cavity-added to magnon input noise ratio (no squeezing, equal occupations).

    Vanishes at omega = 0 when g = sqrt(kappa_a kappa_m)/2, the operating
    point at which the readout chain adds no noise.
    """
    w = np.asarray(omega, dtype=float)
    ka, km, g = params.kappa_a, params.kappa_m, params.g_am
    return ((w ** 2 + ka ** 2 / 4) * (w ** 2 + km ** 2 / 4) / (g ** 2 * ka * km)
            + (g ** 2 - 2 * w ** 2) / (ka * km) - 0.5)


def nsphere_psd(params: SystemParams, omega_grid, channel: str = "x",
                signal_psd: float = 0.0,
                units: str = "tesla2_per_hertz") -> SpectrumSeries:
    """Stationary PSD with N identical spheres forming a collective bright mode.

    The magnon input noise is reduced by 1/N and the cavity term is filtered
    by the collective response; N = 1 reduces exactly to `stationary_psd`.
    """
    n = params.n_spheres
    w = np.asarray(omega_grid, dtype=float)
    base = stationary_psd(params, w, channel=channel, signal_psd=signal_psd,
                          units="tesla2_per_hertz")
    if n == 1:
        return stationary_psd(params, w, channel=channel, signal_psd=signal_psd,
                              units=units)
    eps2 = params.epsilon_b ** 2
    xi_x, xi_y = xi_factors(params.bath_squeeze)
    xi = xi_x if channel == "x" else xi_y
    a_n = np.abs(cavity_response(params, w, n_coll=n)) ** 2
    magnon = base.components["magnon"] / n
    cavity = xi * a_n * (params.n_bar_a + 0.5) / (n ** 2 * params.kappa_a * eps2)
    signal = base.components["signal"]
    total = signal + magnon + cavity
    return SpectrumSeries(
        omega=w,
        values=_apply_units(total, params, units),
        channel=channel, units=units,
        components={
            "signal": _apply_units(signal, params, units),
            "magnon": _apply_units(magnon, params, units),
            "cavity": _apply_units(cavity, params, units),
        },
    )


def nsphere_noise_ratio_opt(kappa_a: float, kappa_m: float, omega) -> np.ndarray:
    """Collective noise ratio at the optimal coupling N g^2 = kappa_a kappa_m / 4.

    Equals omega^2 [4 omega^2 + (kappa_a - kappa_m)^2] / (kappa_a kappa_m)^2;
    zero on resonance, unity at the bandwidth threshold.
    """
    if kappa_a <= 0 or kappa_m <= 0:
        raise PhysicsError("decay rates must be positive")
    w = np.asarray(omega, dtype=float)
    return w ** 2 * (4 * w ** 2 + (kappa_a - kappa_m) ** 2) / (kappa_a ** 2 * kappa_m ** 2)


def bandwidth_threshold(kappa_a: float, kappa_m: float) -> float:
    """Half-width of the band where cavity-added noise stays below magnon noise
    at optimal collective coupling; kappa/sqrt(2) in the symmetric case."""
    if kappa_a <= 0 or kappa_m <= 0:
        raise PhysicsError("decay rates must be positive")
    d2 = (kappa_a - kappa_m) ** 2
    return math.sqrt((-d2 + math.sqrt(d2 ** 2 + 16 * kappa_a ** 2 * kappa_m ** 2)) / 8.0)


def bright_mode(params: SystemParams) -> SystemParams:
    """Reduce N identical spheres to the single collective mode they form:
    coupling and field response both scale by sqrt(N)."""
    n = params.n_spheres
    if n == 1:
        return params
    root = math.sqrt(n)
    return params.with_(g_am=params.g_am * root,
                        epsilon_b=params.epsilon_b * root,
                        n_spheres=1)
