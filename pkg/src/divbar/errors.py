"""Exception hierarchy shared across the package."""


class DivbarError(Exception):
    """Base class for all package errors."""


class InvalidMeasure(DivbarError):
    """Jump measure violates a finiteness or support requirement."""


class DivergentIntegral(DivbarError):
    """Exponential-moment integral diverges for the requested exponent."""


class QuadratureFailure(DivbarError):
    """Adaptive quadrature could not reach the requested tolerance."""


class InvalidK(DivbarError):
    """Adjusted risk rate outside its admissible interval."""


class InvalidFraction(DivbarError):
    """Payout fraction outside (0, 1)."""


class NoRoot(DivbarError):
    """A scalar root search found no bracket or failed to converge."""


class BarrierConditionViolated(DivbarError):
    """The regime condition guaranteeing a barrier above the retention
    kink fails; no closed-form policy exists here."""


class DegenerateLog(DivbarError):
    """Barrier formula hits a vanishing log argument denominator."""


class SignViolation(DivbarError):
    """A solved coefficient came out with the wrong sign."""


class NegativeSurplus(DivbarError):
    """Value-function evaluation requested at x < 0."""


class ConfigInvalid(DivbarError):
    """Simulation configuration violates a resolution or horizon bound."""


class ParseError(DivbarError):
    """Config file is syntactically malformed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(DivbarError):
    """Config file parsed but a value violates a model bound."""
