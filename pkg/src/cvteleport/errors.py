"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operands live on different truncated Fock spaces."""


class DegenerateInputError(ValueError):
    """Input is mathematically degenerate (zero-norm state, negative nbar, ...)."""


class NumericalConsistencyError(ArithmeticError):
    """A quantity violated a bound it satisfies exactly in infinite dimension."""


class TruncationError(RuntimeError):
    """Truncation leakage exceeded the configured bound; raise n_max or shrink the state."""


class EnvelopeError(RuntimeError):
    """Rejection-sampling envelope was exceeded by the target density."""


class ConfigError(ValueError):
    """Invalid run configuration (CLI or config file)."""
