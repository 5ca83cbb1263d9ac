"""Exception types for numeric degeneracies.

Validation problems (bad shapes, out-of-range indices, malformed files)
raise plain :class:`ValueError`.  The classes below mark conditions where
the requested quantity is not defined at the given data, such as a
vanishing spectral gap.  The command line maps the two kinds to distinct
exit codes so callers can tell bad input apart from bad geometry.
"""

__all__ = [
    "NumericError",
    "ConvergenceError",
    "DegenerateGapError",
    "DegenerateCorrectionError",
    "SingularResolventError",
    "DegenerateDrawError",
]


class NumericError(Exception):
    """Base class for degeneracy failures."""


class ConvergenceError(NumericError):
    """An iterative routine exhausted its iteration budget."""


class DegenerateGapError(NumericError):
    """Eigenvalues required to be separated are numerically equal."""


class DegenerateCorrectionError(NumericError):
    """A debiasing denominator vanished."""


class SingularResolventError(NumericError):
    """A resolvent was requested at a shift sitting on the spectrum."""


class DegenerateDrawError(NumericError):
    """Rejection sampling used up its redraw budget."""
