"""Exception types shared across the toolkit."""


class SpintrackError(Exception):
    """Base class for toolkit errors."""


class DomainError(SpintrackError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class ConfigError(SpintrackError, ValueError):
    """An experiment specification or parameter set is invalid."""


class NumericalError(SpintrackError, ArithmeticError):
    """A computation failed for numerical reasons (singularity, divergence)."""


class UnsupportedModelError(SpintrackError, ValueError):
    """The requested signal or noise model is not handled by this estimator."""


class IntegrityError(SpintrackError, IOError):
    """A persisted dataset or result file failed an integrity check."""
