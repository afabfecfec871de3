"""Exception hierarchy shared across the package."""


class MmdpError(Exception):
    """Base class for all library errors."""


class MissingFileError(MmdpError):
    """A required domain file does not exist."""


class SchemaError(MmdpError):
    """A CSV file has missing or unknown columns, or malformed cells."""


class ProbabilityError(MmdpError):
    """A probability row group does not sum to one (or has negative mass)."""


class IdIndexError(MmdpError):
    """State/action/model ids are negative or non-contiguous."""


class DimensionMismatchError(MmdpError):
    """Policy or table dimensions do not match the problem instance."""


class StaleWeightsError(MmdpError):
    """A weight table is inconsistent with the instance it is used on."""


class NonMonotoneError(MmdpError):
    """Internal guard: a coordinate-ascent iteration decreased the return."""


class DegeneratePosteriorError(MmdpError):
    """All model likelihoods are zero and no likelihood floor is set."""


class IntractableError(MmdpError):
    """An exhaustive search was requested on too large an instance."""


class StepSizeError(MmdpError):
    """A first-order solver was configured with a non-positive step size."""
