"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to reach its accuracy target."""


class QuantityMismatchError(ValueError):
    """Two inputs that must describe the same setting disagree."""
