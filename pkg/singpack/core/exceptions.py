"""Exception hierarchy; the CLI maps each family to an exit code."""


class SingpackError(Exception):
    """Root of every error raised by singpack"""


class InputError(SingpackError, ValueError):
    """Malformed or inconsistent input (CLI exit 2)"""


class DomainError(InputError):
    """Point or step outside the domain of a chart"""


class SingularLocusError(DomainError):
    """Evaluation on the locus gamma * R = 1"""


class HyperboloidRegimeError(DomainError):
    """Basin queries are only defined for 0 <= gamma < 1"""


class OutOfRangeError(InputError):
    """Parameter outside the range where a construction applies"""


class InvariantViolation(SingpackError):
    """An asserted identity does not hold (CLI exit 1)"""


class DegeneratePieceError(InvariantViolation):
    """Ellipsoid piece with non-positive base capacity"""


class DegeneratePolarizationError(InvariantViolation):
    """Polarization data for which the gamma coefficients are undefined"""
