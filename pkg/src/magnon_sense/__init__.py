"""Cavity-magnon quantum magnetometry toolkit.

Gaussian open-system dynamics of a cavity-magnon sensor, exact transient and
stationary output noise spectra, transient/stationary SNRs, collective
N-sphere scaling, and three-axis field reconstruction, with trajectory-level
oracles for the closed forms.
"""

__version__ = "0.1.0"

from .errors import ConfigError, EstimationError, PhysicsError, PlanError
from .model import (FieldPulse, SphereGeometry, SqueezeParams, SystemParams,
                    bath_correlators, coupling_from_geometry, epsilon_b_default,
                    thermal_occupation)
from .dynamics import (CovarianceState, LinearSystem, build_diffusion, build_drift,
                       evolve_covariance, linear_system, monte_carlo_covariance,
                       monte_carlo_output_spectrum, pulse_jump, steady_covariance)
from .series import SpectrumSeries
from .spectra import (TransientKernel, bandwidth_threshold, bright_mode,
                      cavity_response, noise_ratio, nsphere_noise_ratio_opt,
                      nsphere_psd, stationary_psd, transient_kernel,
                      transient_noise_psd, xi_factors)
from .sensing import (CalibrationPlan, McNoise, ReconstructionResult, SnrResult,
                      calibration_plan, reconstruct_field, stationary_snr,
                      synthesize_measurements, transient_snr)
from .presets import figure_data, optimal_coupling, paper_system

__all__ = [
    "__version__",
    "ConfigError", "EstimationError", "PhysicsError", "PlanError",
    "FieldPulse", "SphereGeometry", "SqueezeParams", "SystemParams",
    "bath_correlators", "coupling_from_geometry", "epsilon_b_default",
    "thermal_occupation",
    "CovarianceState", "LinearSystem", "build_diffusion", "build_drift",
    "evolve_covariance", "linear_system", "monte_carlo_covariance",
    "monte_carlo_output_spectrum", "pulse_jump", "steady_covariance",
    "SpectrumSeries",
    "TransientKernel", "bandwidth_threshold", "bright_mode", "cavity_response",
    "noise_ratio", "nsphere_noise_ratio_opt", "nsphere_psd", "stationary_psd",
    "transient_kernel", "transient_noise_psd", "xi_factors",
    "CalibrationPlan", "McNoise", "ReconstructionResult", "SnrResult",
    "calibration_plan", "reconstruct_field", "stationary_snr",
    "synthesize_measurements", "transient_snr",
    "figure_data", "optimal_coupling", "paper_system",
]
