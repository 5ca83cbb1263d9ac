"""Plain-text CSV readers and writers for matrices and vectors.

Writers emit 17 significant digits so float64 values round trip exactly.
All files are UTF-8.
"""

import numpy as np

__all__ = ["read_matrix", "write_matrix", "read_vector"]

_FORMAT = "%.17g"


def write_matrix(a, path):
    """Write a 1-D or 2-D array as comma-separated decimal rows."""
    np.savetxt(path, np.atleast_2d(np.asarray(a, dtype=float)), fmt=_FORMAT,
               delimiter=",", encoding="utf-8")


def read_matrix(path):
    """Read a CSV of decimal entries as a 2-D float array."""
    try:
        out = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2, encoding="utf-8")
    except ValueError as exc:
        raise ValueError(f"{path}: malformed matrix CSV ({exc})") from None
    return out


def read_vector(path):
    """Read a single-row or single-column CSV as a 1-D float array."""
    out = read_matrix(path)
    if out.shape[0] != 1 and out.shape[1] != 1:
        raise ValueError(f"{path}: expected a vector, got shape {out.shape}")
    return out.ravel()
