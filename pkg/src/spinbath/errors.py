"""Exception types shared across the package."""


class SpinbathError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SpinbathError):
    """Invalid model, configuration value, or experiment geometry."""


class ScheduleError(ConfigError):
    """Leap schedule incompatible with the propagator's time step."""


class ZeroGenerator(SpinbathError):
    """The spectral bound is zero: evolution is the identity, skip expansion."""


class NumericError(SpinbathError):
    """Numerical breakdown during propagation (non-finite amplitudes)."""
