"""Physical parameters of the cavity-magnon sensor and derived bath quantities.

All frequencies and rates are stored in angular units (rad/s).  Configuration
ingest converts ordinary-frequency values (Hz and friends) with a factor 2*pi;
nothing in this module ever applies that factor itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from scipy.constants import hbar, k as k_B, mu_0

from .errors import PhysicsError

TWO_PI = 2.0 * math.pi


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation of a mode at angular frequency `omega`.

    Returns exactly 0 at zero temperature and decays smoothly (without
    overflow) deep in the quantum regime hbar*omega >> k_B*T.
    """
    if omega <= 0:
        raise PhysicsError(f"mode frequency must be positive, got {omega}")
    if temperature < 0:
        raise PhysicsError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0.0:
        return 0.0
    x = hbar * omega / (k_B * temperature)
    if x > 700.0:
        # 1/expm1(x) would overflow the intermediate; the occupation itself
        # underflows gracefully as exp(-x).
        return math.exp(-x)
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class SqueezeParams:
    """Squeezing amplitude r >= 0 and phase theta (stored in [0, 2*pi))."""

    r: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if not (self.r >= 0.0 and math.isfinite(self.r)):
            raise PhysicsError(f"squeezing amplitude must be finite and >= 0, got {self.r}")
        if not math.isfinite(self.theta):
            raise PhysicsError(f"squeezing phase must be finite, got {self.theta}")
        object.__setattr__(self, "theta", self.theta % TWO_PI)


def bath_correlators(sq: SqueezeParams, n_th: float) -> tuple[float, float, float]:
    """Input-noise correlator parameters (N_q, Re M_q, Im M_q) of a squeezed
    thermal bath with mean thermal occupation `n_th`.

    N_q = sinh^2(r) + n cosh(2r),  M_q = (2n+1) e^{i theta} sinh(r) cosh(r).
    """
    if n_th < 0:
        raise PhysicsError(f"thermal occupation must be >= 0, got {n_th}")
    r, theta = sq.r, sq.theta
    n_q = math.sinh(r) ** 2 + n_th * math.cosh(2 * r)
    m_mag = (2 * n_th + 1) * math.sinh(r) * math.cosh(r)
    return n_q, m_mag * math.cos(theta), m_mag * math.sin(theta)


@dataclass(frozen=True)
class SphereGeometry:
    """Geometry of the YIG sphere(s) and cavity mode used to derive couplings."""

    spin_s: float = 2.5
    n_spins: float = 3.5e9
    cavity_volume: float = 1e-9  # m^3
    mu0: float = mu_0
    field_per_photon: float | None = None  # overrides the derived B_a when set

    def __post_init__(self):
        for name in ("spin_s", "n_spins", "cavity_volume", "mu0"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise PhysicsError(f"geometry field {name} must be positive, got {v}")


def coupling_from_geometry(geom: SphereGeometry, omega_a: float) -> float:
    """Collective cavity-magnon coupling g_am = gamma * B_a * sqrt(2 s N_s) / 2,
    with the single-photon field B_a = sqrt(hbar * omega_a * mu0 / (2 V_a)).

    Uses the electron gyromagnetic ratio 2*pi*28 GHz/T; scales as sqrt(N_s).
    """
    if omega_a <= 0:
        raise PhysicsError(f"cavity frequency must be positive, got {omega_a}")
    b_a = geom.field_per_photon
    if b_a is None:
        b_a = math.sqrt(hbar * omega_a * geom.mu0 / (2.0 * geom.cavity_volume))
    gamma = TWO_PI * 28e9
    return gamma * b_a * math.sqrt(2.0 * geom.spin_s * geom.n_spins) / 2.0


def epsilon_b_default(gamma_gyro: float, spin_s: float, n_spins: float) -> float:
    """Default magnon-field coupling (gamma/2) * sqrt(2 s N_s).

    This is the transverse Zeeman coefficient of the collective spin in the
    small-excitation (bosonic) limit, per unit field and divided by hbar.  It
    is a documented default; measured devices should override it in config.
    """
    if gamma_gyro <= 0 or spin_s < 0 or n_spins < 0:
        raise PhysicsError("gamma_gyro must be positive; spin_s, n_spins must be >= 0")
    return (gamma_gyro / 2.0) * math.sqrt(2.0 * spin_s * n_spins)


@dataclass(frozen=True)
class SystemParams:
    """All rates and constants of the sensor, in angular units.

    `bath_squeeze` is the injected squeezing active while sensing;
    `pre_squeeze` is the squeezing used to prepare the initial steady state.
    """

    omega_a: float
    kappa_a: float
    kappa_m: float
    g_am: float
    epsilon_b: float
    gamma_gyro: float
    temperature: float
    omega_m: float | None = None
    n_spheres: int = 1
    bath_squeeze: SqueezeParams = field(default_factory=SqueezeParams)
    pre_squeeze: SqueezeParams = field(default_factory=SqueezeParams)

    def __post_init__(self):
        if self.omega_m is None:
            object.__setattr__(self, "omega_m", self.omega_a)
        for name in ("omega_a", "omega_m", "kappa_a", "kappa_m", "g_am",
                     "epsilon_b", "gamma_gyro"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise PhysicsError(f"{name} must be positive and finite, got {v}")
        if not (self.temperature >= 0 and math.isfinite(self.temperature)):
            raise PhysicsError(f"temperature must be >= 0, got {self.temperature}")
        if not (isinstance(self.n_spheres, int) and self.n_spheres >= 1):
            raise PhysicsError(f"n_spheres must be an integer >= 1, got {self.n_spheres}")
        # occupations must come out finite and non-negative
        for n in (self.n_bar_a, self.n_bar_m):
            if not (n >= 0 and math.isfinite(n)):
                raise PhysicsError(f"derived thermal occupation invalid: {n}")

    @property
    def n_bar_a(self) -> float:
        return thermal_occupation(self.omega_a, self.temperature)

    @property
    def n_bar_m(self) -> float:
        return thermal_occupation(self.omega_m, self.temperature)

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class FieldPulse:
    """Delta-pulse field amplitudes: B(t) = B0 * delta(t), components in T*s."""

    b0_x: float = 0.0
    b0_y: float = 0.0
    b0_z: float = 0.0

    def __post_init__(self):
        for name in ("b0_x", "b0_y", "b0_z"):
            if not math.isfinite(getattr(self, name)):
                raise PhysicsError(f"pulse component {name} must be finite")

    def gamma_b0_z(self, params: SystemParams) -> float:
        """Dimensionless longitudinal kick angle gamma * B0_z."""
        return params.gamma_gyro * self.b0_z
