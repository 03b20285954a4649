"""Exception hierarchy shared by all fracflow modules."""


class FracflowError(Exception):
    """Base class for every error raised by fracflow."""


class ParameterError(FracflowError, ValueError):
    """A physical or numerical parameter is outside its admissible range."""


class ConfigError(ParameterError):
    """A run configuration could not be parsed or validated."""


class PoleError(FracflowError, ValueError):
    """Gamma function evaluated at a nonpositive integer."""


class BracketError(FracflowError, RuntimeError):
    """A root bracket did not contain a sign change."""


class ConvergenceConditionError(FracflowError, ValueError):
    """G-function requested outside its Laplace-pair domain (a*c - b <= 0)."""


class CancellationError(FracflowError, ArithmeticError):
    """An alternating series lost all significant digits in double precision."""


class QuadratureError(FracflowError, RuntimeError):
    """Panel doubling failed to reach the requested tolerance."""


class InversionError(FracflowError, ValueError):
    """Numerical Laplace inversion requested with invalid arguments."""


class ParameterRegimeError(FracflowError, RuntimeError):
    """Neither the series nor its fallback produced a trustworthy value."""


class InstabilityError(FracflowError, RuntimeError):
    """The finite-difference solution blew up."""
