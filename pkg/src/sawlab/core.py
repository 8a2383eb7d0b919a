"""Shared physical units, device-description types, and SAW kinematics.

Unit conventions used across the package:
  - frequencies in Hz (plain cycles/s, never angular; 2*pi is applied on demand)
  - lengths in m, conductivities in S/m, voltages in V
  - all values double precision
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import pi

import numpy as np


class SawlabError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(SawlabError):
    """Invalid or inconsistent configuration input."""


class FitError(SawlabError):
    """A fit could not be set up or found no usable signal."""


@dataclass(frozen=True)
class MaterialParams:
    """Substrate constants for SAW propagation on GaAs.

    saw_velocity: SAW phase velocity in m/s. Defaults to 2864 m/s for the
        [110] direction on (001) GaAs (literature value; override in config).
    k2_bulk: electromechanical coupling constant k^2 of the bare insulating
        substrate (dimensionless fraction, default 0.07%).
    sigma_m: crossover conductivity of the relaxation loss model in S/m;
        attenuation from a buried conductive layer peaks when the layer
        conductivity equals sigma_m.
    """

    saw_velocity: float = 2864.0
    k2_bulk: float = 7.0e-4
    sigma_m: float = 10.0

    def __post_init__(self) -> None:
        if not self.saw_velocity > 0:
            raise ValueError(f"saw_velocity must be > 0, got {self.saw_velocity}")
        if not 0 < self.k2_bulk < 1:
            raise ValueError(f"k2_bulk must be in (0, 1), got {self.k2_bulk}")
        if not self.sigma_m > 0:
            raise ValueError(f"sigma_m must be > 0, got {self.sigma_m}")


@dataclass(frozen=True)
class LayerStack:
    """Geometry and conductivity of the buried n-doped layer.

    depth: distance from the free surface to the top of the doped layer [m].
    thickness: doped-layer thickness [m]. The default is the nominal
        47 nm; the growth sheet quotes 46 nm for the same layer, see the
        config documentation.
    sigma_xx: sheet-material conductivity of the layer [S/m].
    """

    depth: float = 360e-9
    thickness: float = 47e-9
    sigma_xx: float = 1.0e5

    def __post_init__(self) -> None:
        if self.depth < 0:
            raise ValueError(f"depth must be >= 0, got {self.depth}")
        if not self.thickness > 0:
            raise ValueError(f"thickness must be > 0, got {self.thickness}")
        if self.sigma_xx < 0:
            raise ValueError(f"sigma_xx must be >= 0, got {self.sigma_xx}")


@dataclass(frozen=True)
class TraceMeta:
    """Axis labels, units and provenance attached to a Trace."""

    x_label: str = "x"
    x_unit: str = ""
    y_label: str = "y"
    y_unit: str = ""
    provenance: str = ""
    warnings: tuple[str, ...] = ()
    extra: dict = field(default_factory=dict)

    def with_warning(self, message: str) -> "TraceMeta":
        return replace(self, warnings=self.warnings + (message,))


@dataclass(frozen=True)
class Trace:
    """Ordered (x, y[, y_err]) samples, the universal data unit.

    x must be strictly increasing. y is real for measured/synthesized data;
    complex y is allowed for model S-parameter traces (y_err and Poisson
    noise then do not apply).
    """

    x: np.ndarray
    y: np.ndarray
    y_err: np.ndarray | None = None
    meta: TraceMeta = field(default_factory=TraceMeta)

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y)
        if not np.iscomplexobj(y):
            y = y.astype(float)
        if x.ndim != 1 or y.ndim != 1:
            raise ValueError("x and y must be one-dimensional")
        if len(x) != len(y):
            raise ValueError(f"length mismatch: len(x)={len(x)}, len(y)={len(y)}")
        if len(x) >= 2:
            bad = np.nonzero(np.diff(x) <= 0)[0]
            if bad.size:
                i = int(bad[0]) + 1
                raise ValueError(f"x not strictly increasing at index {i} (x[{i}]={x[i]!r})")
        y_err = self.y_err
        if y_err is not None:
            y_err = np.asarray(y_err, dtype=float)
            if len(y_err) != len(x):
                raise ValueError(f"length mismatch: len(y_err)={len(y_err)}, len(x)={len(x)}")
            if np.any(y_err < 0):
                i = int(np.nonzero(y_err < 0)[0][0])
                raise ValueError(f"y_err must be >= 0, violated at index {i}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "y_err", y_err)

    def __len__(self) -> int:
        return len(self.x)

    @property
    def is_complex(self) -> bool:
        return bool(np.iscomplexobj(self.y))

    def with_y(self, y: np.ndarray, y_err: np.ndarray | None = None,
               meta: TraceMeta | None = None) -> "Trace":
        return Trace(self.x, y, y_err, meta if meta is not None else self.meta)


def saw_wavelength(f: float, m: MaterialParams) -> float:
    """SAW wavelength [m] at drive frequency f [Hz]: v / f."""
    if not f > 0:
        raise ValueError(f"frequency must be > 0, got {f}")
    return m.saw_velocity / f


def wavevector(f: float, m: MaterialParams) -> float:
    """SAW wavevector q [rad/m] at drive frequency f [Hz]: 2*pi*f / v."""
    if not f > 0:
        raise ValueError(f"frequency must be > 0, got {f}")
    return 2.0 * pi * f / m.saw_velocity
