"""Exception hierarchy shared by the library and the CLI."""


class MramQuantError(Exception):
    """Base class for all library errors."""


class DomainError(MramQuantError, ValueError):
    """An argument lies outside the domain of the operation."""


class ValidationError(MramQuantError, ValueError):
    """A parameter object violates its invariants."""


class NumericError(MramQuantError, ArithmeticError):
    """A numerical procedure failed to produce a trustworthy result."""


class BracketError(NumericError):
    """Root bracket endpoints do not straddle a sign change."""

    def __init__(self, lo, hi, f_lo, f_hi):
        super().__init__(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={f_lo!r}, f(hi)={f_hi!r}"
        )
        self.lo, self.hi = lo, hi
        self.f_lo, self.f_hi = f_lo, f_hi


class ConvergenceError(NumericError):
    """Iteration budget exhausted before the tolerance was met."""

    def __init__(self, message, last_bracket=None):
        super().__init__(message)
        self.last_bracket = last_bracket


class DegenerateQuantizerError(NumericError):
    """Two quantizer boundaries collapsed onto each other."""


class QuadratureError(NumericError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ConfigError(MramQuantError):
    """Malformed or incomplete configuration file."""
