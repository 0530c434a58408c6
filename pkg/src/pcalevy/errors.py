"""Exception types shared across the package."""


class PcaError(Exception):
    """Base class for all package errors."""


class ParameterError(PcaError, ValueError):
    """A model parameter violates its admissible range."""


class DomainError(PcaError, ValueError):
    """A function argument lies outside the domain where the identity holds."""


class PoleError(DomainError):
    """The Laplace exponent was evaluated at its pole lambda = -rho."""


class RootError(PcaError, ArithmeticError):
    """The characteristic cubic does not have three distinct real roots."""


class DivergenceError(PcaError, ArithmeticError):
    """An expected discounted cost is infinite for the requested trigger level."""


class InfeasibleDomainError(PcaError, ValueError):
    """No finite-cost trigger level lies in the requested search domain."""
