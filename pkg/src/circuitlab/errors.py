"""Exception types shared across engines and the CLI."""


class CircuitLabError(Exception):
    """Base class for all circuitlab errors."""


class ParameterError(CircuitLabError, ValueError):
    """A parameter is outside its allowed range."""


class InvalidGeometryError(ParameterError):
    """The requested lattice or circuit geometry cannot be built."""


class CapExceededError(CircuitLabError, MemoryError):
    """A dense computation would exceed the configured size cap."""


class NumericalDegeneracyError(CircuitLabError, ArithmeticError):
    """An engine hit a numerically degenerate state (e.g. lost normalization)."""


class ConfigError(CircuitLabError, ValueError):
    """An experiment configuration failed validation."""
