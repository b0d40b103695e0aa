"""Exception hierarchy shared by every solver."""


class OTError(Exception):
    """Base class for all library errors."""


class ValidationError(OTError, ValueError):
    """Invalid input data."""


class NegativeWeight(ValidationError):
    pass


class ZeroMass(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class NonSymmetric(ValidationError):
    pass


class NotPositiveSemidefinite(ValidationError):
    pass


class MixedFeatureKinds(ValidationError):
    pass


class UnsupportedExponent(ValidationError):
    pass


class UnsupportedWeights(ValidationError):
    pass


class BadParams(ValidationError):
    pass


class DisconnectedGraph(ValidationError):
    pass


class NoConnectedCandidate(ValidationError):
    pass


class SolverError(OTError, RuntimeError):
    """A solver could not produce a result."""


class NumericalFailure(SolverError):
    pass


class NonFinite(SolverError):
    pass


class SingularCovariance(SolverError):
    pass


class LineSearchFailure(SolverError):
    pass


class ParseError(OTError):
    """Malformed input file."""
