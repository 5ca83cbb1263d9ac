"""Confidence intervals for eigenvector linear forms under additive noise.

All estimates are computed from the single observed matrix: the noise
level from the truncation residual, the spectral bias and debiased
eigenvalues from the empirical spectrum, and the plug-in variance from
those. Indices are 0-based throughout.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateCorrectionError, DegenerateGapError
from .inference import build_interval, unit_direction
from .linalg import (Ordering, SpectralDecomposition, as_symmetric,
                     canonicalize_columns, rank_r_truncation, sym_eig)

__all__ = ["MdEstimates", "estimate_noise_md", "bias_md",
           "debias_eigenvalue_md", "md_estimates", "variance_md",
           "ci_md", "ci_md_entrywise"]

_REL_TOL = 1e-10


def _require_separated(gaps, scale, context):
    """Reject eigenvalue gaps indistinguishable from zero at scale."""
    if gaps.size and np.min(np.abs(gaps)) < _REL_TOL * max(1.0, abs(scale)):
        raise DegenerateGapError(
            f"eigenvalue gap below resolution while computing {context}")


def _decompose(s_hat, dec):
    if dec is None:
        dec = sym_eig(as_symmetric(s_hat), Ordering.BY_MAGNITUDE_DESC)
        dec = SpectralDecomposition(dec.eigenvalues,
                                    canonicalize_columns(dec.eigenvectors),
                                    dec.ordering)
    return dec


def _check_rank(r, n):
    if not 0 <= r <= n:
        raise ValueError(f"rank {r} outside [0, {n}]")


def estimate_noise_md(s_hat, r, *, dec=None):
    """Mean squared off-diagonal entry of the rank-r truncation residual."""
    s_hat = as_symmetric(s_hat)
    n = s_hat.shape[0]
    if n < 2:
        raise ValueError("noise estimation needs a matrix of size >= 2")
    _check_rank(r, n)
    dec = _decompose(s_hat, dec)
    residual = s_hat - rank_r_truncation(dec, r)
    rows, cols = np.triu_indices(n, k=1)
    return float(np.mean(residual[rows, cols] ** 2))


def bias_md(dec, r, j, sigma2):
    """Second-order bias of the j-th empirical eigenvector's alignment."""
    n = dec.dim
    _check_rank(r, n)
    if not 0 <= j < r:
        raise ValueError(f"index {j} outside [0, {r})")
    if not sigma2 >= 0.0:
        raise ValueError(f"noise variance must be nonnegative, got {sigma2!r}")
    tail = dec.eigenvalues[r:]
    if tail.size == 0:
        return 0.0
    gaps = dec.eigenvalues[j] - tail
    _require_separated(gaps, dec.eigenvalues[j], "eigenvector bias")
    return float(sigma2 * np.sum(1.0 / gaps ** 2))


def debias_eigenvalue_md(dec, r, k, sigma2_hat):
    """Remove the bulk repulsion shift from the k-th empirical eigenvalue."""
    n = dec.dim
    _check_rank(r, n)
    if not 0 <= k < r:
        raise ValueError(f"index {k} outside [0, {r})")
    tail = dec.eigenvalues[r:]
    if tail.size == 0:
        return float(dec.eigenvalues[k])
    gaps = dec.eigenvalues[k] - tail
    _require_separated(gaps, dec.eigenvalues[k], "eigenvalue debiasing")
    return float(dec.eigenvalues[k] - sigma2_hat * np.sum(1.0 / gaps))


@dataclass(frozen=True)
class MdEstimates:
    """All plug-in quantities derived from one observed matrix."""

    sigma2_hat: float
    b_hat: np.ndarray
    lambda_check: np.ndarray
    dec: SpectralDecomposition
    r: int

    def __post_init__(self):
        if self.b_hat.shape != (self.r,) or self.lambda_check.shape != (self.r,):
            raise ValueError("estimate arrays must have length r")
        if np.any(self.b_hat < 0.0):
            raise ValueError("bias estimates must be nonnegative")


def md_estimates(s_hat, r, *, dec=None):
    """Noise, bias, and debiased eigenvalues from the observed matrix.

    A caller-supplied decomposition is used as given, so simulation code
    can keep its own sign alignment; otherwise columns get the canonical
    sign convention.
    """
    s_hat = as_symmetric(s_hat)
    _check_rank(r, s_hat.shape[0])
    dec = _decompose(s_hat, dec)
    sigma2_hat = estimate_noise_md(s_hat, r, dec=dec)
    b_hat = np.array([bias_md(dec, r, k, sigma2_hat) for k in range(r)])
    lam_check = np.array([debias_eigenvalue_md(dec, r, k, sigma2_hat)
                          for k in range(r)])
    return MdEstimates(sigma2_hat, b_hat, lam_check, dec, r)


def variance_md(est, a, j):
    """Plug-in standard deviation of the j-th eigenvector linear form."""
    if not 0 <= j < est.r:
        raise ValueError(f"index {j} outside [0, {est.r})")
    a = unit_direction(a, est.dec.dim)
    lam_check = est.lambda_check
    scale = max(1.0, float(np.max(np.abs(lam_check))) if est.r else 1.0)
    if abs(lam_check[j]) < _REL_TOL * scale:
        raise DegenerateGapError(
            "debiased eigenvalue too close to zero for a variance estimate")
    proj = est.dec.eigenvectors[:, :est.r].T @ a
    tail_mass = max(0.0, float(a @ a - proj @ proj))
    others = np.arange(est.r) != j
    gaps = lam_check[j] - lam_check[others]
    _require_separated(gaps, lam_check[j], "variance estimation")
    # Bilinear forms u_k' N u_j carry variance sigma^2 exactly under the
    # off-diagonal-sigma^2 noise normalization, hence no factor 2.
    spike = float(np.sum(proj[others] ** 2 * (1.0 + est.b_hat[others])
                         / gaps ** 2))
    s2 = est.sigma2_hat * (spike + tail_mass / lam_check[j] ** 2)
    if s2 < 0.0:
        raise DegenerateCorrectionError(
            f"negative variance estimate {s2!r}")
    return float(np.sqrt(s2))


def _diagnostics(est, j, s_hat_val):
    diag = {"sigma2_hat": est.sigma2_hat, "b_hat_j": float(est.b_hat[j])}
    for k in range(est.r):
        diag[f"lambda_check_{k + 1}"] = float(est.lambda_check[k])
    diag["s_hat"] = s_hat_val
    return diag


def ci_md(s_hat, r, j, a, alpha=0.05, *, dec=None):
    """Debiased interval for the linear form a' u_j."""
    est = md_estimates(s_hat, r, dec=dec)
    a = unit_direction(a, est.dec.dim)
    s = variance_md(est, a, j)
    point = float(est.dec.eigenvectors[:, j] @ a
                  * np.sqrt(1.0 + est.b_hat[j]))
    return build_interval(point, s, alpha, _diagnostics(est, j, s))


def ci_md_entrywise(s_hat, r, j, i, alpha=0.05, *, dec=None):
    """Interval for the i-th entry of u_j; no alignment debiasing."""
    est = md_estimates(s_hat, r, dec=dec)
    n = est.dec.dim
    if not 0 <= i < n:
        raise ValueError(f"entry index {i} outside [0, {n})")
    a = np.zeros(n)
    a[i] = 1.0
    s = variance_md(est, a, j)
    point = float(est.dec.eigenvectors[i, j])
    return build_interval(point, s, alpha, _diagnostics(est, j, s))
