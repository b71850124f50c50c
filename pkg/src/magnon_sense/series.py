"""Frequency-series container shared by the spectra and dynamics modules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PhysicsError

CHANNELS = ("x", "y")
UNITS = ("tesla2_per_hertz", "epsilonb_normalized")


@dataclass(frozen=True)
class SpectrumSeries:
    """PSD values on a strictly increasing angular-frequency grid.

    `components` holds an optional per-term breakdown (e.g. signal, magnon,
    cavity, transient) plus auxiliary channels such as `stderr` or the complex
    trajectory mean split into `mean_re`/`mean_im`.
    """

    omega: np.ndarray
    values: np.ndarray
    channel: str = "x"
    units: str = "tesla2_per_hertz"
    components: dict = field(default_factory=dict)
    stderr: np.ndarray | None = None

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)
        if omega.ndim != 1 or values.shape != omega.shape:
            raise PhysicsError("omega and values must be 1-D arrays of equal length")
        if omega.size > 1 and not np.all(np.diff(omega) > 0):
            raise PhysicsError("frequency grid must be strictly increasing")
        if self.channel not in CHANNELS:
            raise PhysicsError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if self.units not in UNITS:
            raise PhysicsError(f"units must be one of {UNITS}, got {self.units!r}")

    @property
    def mean_field(self) -> np.ndarray | None:
        """Complex trajectory-mean spectrum, when the estimator recorded one."""
        if "mean_re" in self.components and "mean_im" in self.components:
            return self.components["mean_re"] + 1j * self.components["mean_im"]
        return None
