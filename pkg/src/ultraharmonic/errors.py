"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """Inconsistent options, unknown check ids, mismatched quadrature rules."""


class AccuracyError(RuntimeError):
    """Adaptive refinement hit its cap before reaching the requested agreement."""


class NumericError(RuntimeError):
    """A linear-algebra kernel failed."""


class ResourceError(MemoryError):
    """Requested object would exceed the memory budget."""
