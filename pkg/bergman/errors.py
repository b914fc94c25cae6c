"""Exception hierarchy shared by the numerics modules and the CLI."""

from typing import Any


class BergmanError(Exception):
    """Base class for every error raised by the package."""


class DomainError(BergmanError, ValueError):
    """A point, index or parameter lies outside where an operation is defined."""


class ConfigError(BergmanError, ValueError):
    """A run configuration failed validation."""


class NumericalError(BergmanError, ArithmeticError):
    """A computation could not produce a usable number."""


class NonFiniteValueError(NumericalError):
    """An integrand returned inf or nan at a quadrature node."""

    def __init__(self, node: Any, value: Any):
        self.node = node
        self.value = value
        super().__init__(f"non-finite value {value!r} at node {node!r}")


class ConvergenceError(NumericalError):
    """An iterative method stopped before meeting its tolerance."""
