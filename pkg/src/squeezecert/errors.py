"""Exception hierarchy for squeezecert."""


class SqueezecertError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(SqueezecertError):
    """A domain object violates one of its invariants."""


class RangeError(ValidationError):
    """A measurement outcome lies outside the closed interval [-1, 1]."""


class PairingError(ValidationError):
    """The two measurement axes do not have matching round counts."""


class LatticeError(ValidationError):
    """Strict mode: an outcome is not on the N-spin outcome lattice."""


class DivisionError(SqueezecertError):
    """A ratio is undefined because its denominator vanishes."""


class TooFewSamples(SqueezecertError):
    """An estimator needs more data points than were supplied."""


class EmptyBatch(TooFewSamples):
    """An operation was asked to average over zero rounds."""


class BlockingError(SqueezecertError):
    """The pair-block estimator needs a total count divisible by 4."""


class DomainError(SqueezecertError):
    """An argument is outside the mathematical domain of a bound."""


class InfeasibleError(SqueezecertError):
    """No tangent point makes the observed witness negative.

    This is a first-class outcome rather than a crash: the data do not
    even nominally indicate squeezing, so no certificate exists at any
    sample size.
    """


class SizeError(SqueezecertError):
    """The requested system size exceeds the exact-simulation limit."""


class NullViolation(SqueezecertError):
    """A state offered as a null-hypothesis oracle is actually squeezed."""


class ParseError(SqueezecertError):
    """An input file does not match the documented format."""


class MissingField(SqueezecertError):
    """A required field is absent from a record."""
