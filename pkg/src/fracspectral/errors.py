"""Exception hierarchy shared by all modules."""


class FracSpectralError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FracSpectralError, ValueError):
    """An argument lies outside the domain of the operation."""


class PoleError(DomainError):
    """Gamma-type function evaluated at a pole."""


class DivergenceError(DomainError):
    """A series or integral does not converge for the given arguments."""


class AccuracyError(FracSpectralError, ArithmeticError):
    """A numerical procedure could not certify the requested accuracy."""


class NumericError(FracSpectralError, ArithmeticError):
    """An internal numerical routine failed (e.g. eigen-solver, bracketing)."""
