"""sawlab: forward models and parameter estimation for gated-quantum-dot /
surface-acoustic-wave devices."""

__version__ = "0.1.0"

from .core import (
    ConfigError,
    FitError,
    LayerStack,
    MaterialParams,
    SawlabError,
    Trace,
    TraceMeta,
    saw_wavelength,
    wavevector,
)

__all__ = [
    "__version__",
    "ConfigError",
    "FitError",
    "LayerStack",
    "MaterialParams",
    "SawlabError",
    "Trace",
    "TraceMeta",
    "saw_wavelength",
    "wavevector",
]
