"""spintrack: desk-scale physics and data analysis of a continuously monitored
spin-squeezed atomic magnetometer.

Submodules
----------
model       physical constants and derived coupling quantities
signals     seeded magnetic-signal generators (OU, dOU, white, pulses, HMM)
trajectory  homodyne-record simulation and record rearrangement
estimation  conditional variances, Kalman filter/smoother, squeezing analysis
fisher      Monte-Carlo Fisher information and Cramer-Rao bounds
metrics     squeezing/sensitivity figures of merit and calibrations
experiments reproducible drivers behind the command-line interface
dataset     binary dataset export/import for external decoders
"""

__version__ = "0.1.0"

from . import estimation, fisher, metrics, model, signals, trajectory
from ._kernels import USE_NUMBA, backend_name
from .errors import (
    ConfigError,
    DomainError,
    IntegrityError,
    NumericalError,
    SpintrackError,
    UnsupportedModelError,
)

__all__ = [
    "__version__",
    "USE_NUMBA",
    "backend_name",
    "model",
    "signals",
    "trajectory",
    "estimation",
    "fisher",
    "metrics",
    "SpintrackError",
    "DomainError",
    "ConfigError",
    "NumericalError",
    "UnsupportedModelError",
    "IntegrityError",
]
