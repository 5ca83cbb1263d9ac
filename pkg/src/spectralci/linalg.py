"""Symmetric eigendecomposition with explicit ordering, plus shared
numerics: Gaussian cdf/quantile and eigenvector sign conventions.
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import ConvergenceError

__all__ = [
    "Ordering",
    "SpectralDecomposition",
    "as_symmetric",
    "sym_eig",
    "rank_r_truncation",
    "sign_align",
    "canonical_sign",
    "canonicalize_columns",
    "complement_basis",
    "normal_cdf",
    "normal_quantile",
]


class Ordering(enum.Enum):
    """Sort order for eigenvalue/eigenvector pairs."""

    BY_MAGNITUDE_DESC = "by_magnitude_desc"
    BY_VALUE_DESC = "by_value_desc"


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of a real symmetric matrix in a declared order.

    Attributes
    ----------
    eigenvalues : ndarray, shape (n,)
    eigenvectors : ndarray, shape (n, n)
        Orthonormal columns; column k pairs with ``eigenvalues[k]``.
    ordering : Ordering
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    ordering: Ordering

    @property
    def dim(self):
        return int(self.eigenvalues.shape[0])

    def flip_sign(self, k):
        """Copy of this decomposition with eigenvector column k negated."""
        vecs = self.eigenvectors.copy()
        vecs[:, k] = -vecs[:, k]
        return SpectralDecomposition(self.eigenvalues, vecs, self.ordering)


def as_symmetric(a):
    """Validate a square real matrix and return its symmetrized copy.

    Ingested matrices are symmetrized as (A + A')/2 so that file round
    trips cannot introduce asymmetry beyond machine noise.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return (a + a.T) / 2.0


def sym_eig(a, ordering):
    """Full eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Symmetrized on ingestion.
    ordering : Ordering
        BY_MAGNITUDE_DESC sorts by |eigenvalue| descending (the natural
        order for additive-noise signals, whose eigenvalues may be
        negative); BY_VALUE_DESC sorts by value descending (the natural
        order for covariances).  Exact ties keep ascending-value order,
        which makes the result deterministic.

    Returns
    -------
    SpectralDecomposition
    """
    a = as_symmetric(a)
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigendecomposition did not converge: {exc}") from None
    if ordering is Ordering.BY_MAGNITUDE_DESC:
        key = -np.abs(values)
    elif ordering is Ordering.BY_VALUE_DESC:
        key = -values
    else:
        raise ValueError(f"unknown ordering {ordering!r}")
    order = np.argsort(key, kind="stable")
    return SpectralDecomposition(values[order], vectors[:, order], ordering)


def rank_r_truncation(dec, r):
    """Best rank-r approximation assembled from the leading r pairs."""
    n = dec.dim
    if not 0 <= r <= n:
        raise ValueError(f"rank must lie in [0, {n}], got {r}")
    vecs = dec.eigenvectors[:, :r]
    return (vecs * dec.eigenvalues[:r]) @ vecs.T


def sign_align(v_hat, reference):
    """Flip ``v_hat`` if it points against ``reference``.

    Ties (exactly orthogonal) keep ``v_hat`` as given.
    """
    if float(np.dot(v_hat, reference)) < 0.0:
        return -np.asarray(v_hat)
    return np.asarray(v_hat)


def canonical_sign(v):
    """Fix a vector's sign so its largest-magnitude entry is positive.

    Ties pick the lowest index.  This is the deterministic convention
    used when no ground truth is available to align against.
    """
    v = np.asarray(v)
    idx = int(np.argmax(np.abs(v)))
    if v[idx] < 0:
        return -v
    return v


def canonicalize_columns(vecs):
    """Apply :func:`canonical_sign` to every column at once."""
    vecs = np.asarray(vecs)
    idx = np.argmax(np.abs(vecs), axis=0)
    leads = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * np.where(leads < 0, -1.0, 1.0)


def complement_basis(u):
    """Orthonormal basis of the orthogonal complement of span(u).

    ``u`` must have orthonormal columns; the result has n - r of them.
    """
    u = np.asarray(u, dtype=float)
    n, r = u.shape
    q, _ = np.linalg.qr(u, mode="complete")
    return q[:, r:]


def normal_cdf(z):
    """Standard normal distribution function; accepts scalars or arrays."""
    return special.ndtr(z)


def normal_quantile(q):
    """Inverse standard normal distribution function.

    Backed by the Wichura-class rational approximation in scipy; the
    round trip normal_cdf(normal_quantile(q)) = q holds to 1e-8 across
    (1e-6, 1 - 1e-6).
    """
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile is defined on (0, 1), got {q}")
    return float(special.ndtri(q))
