"""Exception hierarchy shared across the package.

Every error carries the process exit code the command line layer maps it to:
1 for bad input, 2 for geometric degeneracy, 3 for internal/solver failures.
"""


class HodgeTrackError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class InputError(HodgeTrackError):
    """Malformed or inconsistent user-supplied data."""

    exit_code = 1


class ParseError(InputError):
    """A file could not be parsed; the message names the offending location."""


class DuplicatePointError(InputError):
    """Two input points coincide exactly; the message names both ids."""


class DimensionError(InputError):
    """Rows of mixed dimension, or a dimension outside the supported range."""


class ClosureError(InputError):
    """A simplex is present without one of its faces."""


class MonotonicityError(InputError):
    """A simplex carries a smaller filtration value than one of its faces."""


class LineageError(InputError):
    """Two slices that should share a parent complex do not."""


class InsufficientSpectrumError(InputError):
    """Fewer eigenpairs of the requested kind exist than were asked for."""


class InfeasibleClusteringError(InputError):
    """More clusters requested than there are distinct points."""


class UnsupportedProjectionError(InputError):
    """Drawing requested for data without 2D coordinates."""


class DegeneracyError(HodgeTrackError):
    """Geometrically degenerate input: collinear cloud, affinely dependent
    simplex vertices, and similar."""

    exit_code = 2


class SolverError(HodgeTrackError):
    """An eigensolver failed to converge or returned unusable residuals."""

    exit_code = 3


class ClassificationError(HodgeTrackError):
    """An eigenvector could not be attributed to a single Hodge subspace."""

    exit_code = 3


class UndefinedSimilarityError(HodgeTrackError):
    """Similarity of a zero vector was requested."""

    exit_code = 3
