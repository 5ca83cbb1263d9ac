"""Confidence intervals for principal-component linear forms.

Estimates come from the sample covariance spectrum of an observed p x n
data matrix. For p > n the spectrum is computed through the n x n Gram
matrix and padded with zeros, so no p x p matrix is ever formed.
Indices are 0-based.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateCorrectionError, DegenerateGapError
from .inference import build_interval, unit_direction
from .linalg import Ordering, canonicalize_columns, sym_eig

__all__ = ["PcaEstimates", "pca_decomposition", "estimate_noise_pca",
           "gamma_hat_pca", "debias_eigenvalue_pca", "bias_pca",
           "pca_estimates", "variance_pca", "ci_pca", "ci_pca_entrywise"]

_REL_TOL = 1e-10

logger = logging.getLogger(__name__)


def _check_data(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"data must be a 2-D array, got ndim {x.ndim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contains non-finite entries")
    return x


def pca_decomposition(x, r):
    """Sample covariance eigenvalues (all p) and leading r eigenvectors."""
    x = _check_data(x)
    p, n = x.shape
    if not 0 <= r <= min(p, n):
        raise ValueError(f"rank {r} outside [0, {min(p, n)}]")
    if n >= p:
        dec = sym_eig(x @ x.T / n, Ordering.BY_VALUE_DESC)
        return dec.eigenvalues, dec.eigenvectors[:, :r]
    gram = sym_eig(x.T @ x / n, Ordering.BY_VALUE_DESC)
    eigenvalues = np.concatenate([gram.eigenvalues, np.zeros(p - n)])
    lifted = x @ gram.eigenvectors[:, :r]
    norms = np.linalg.norm(lifted, axis=0)
    if np.any(norms < 1e-12):
        raise DegenerateGapError(
            "cannot lift an eigenvector with vanishing norm")
    return eigenvalues, lifted / norms


def _large_p(n, p):
    return p * math.log(max(n, p)) ** 4 >= n


def estimate_noise_pca(eigenvalues, r, n, p):
    """Noise variance from the bulk of the sample covariance spectrum.

    High-dimensional regimes average the trailing eigenvalues; when p is
    small relative to n the (r+1)-th eigenvalue alone is used. Near the
    regime cutoff both candidates are logged at debug level.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if eigenvalues.shape != (p,):
        raise ValueError(f"expected {p} eigenvalues, got {eigenvalues.shape}")
    if not 0 <= r < p:
        raise ValueError(f"rank {r} outside [0, {p})")
    if n < 1:
        raise ValueError(f"sample count must be positive, got {n}")
    mean_tail = float(np.sum(eigenvalues[r:]) / (p - r))
    next_eig = float(eigenvalues[r])
    threshold = p * math.log(max(n, p)) ** 4
    if abs(threshold - n) <= 0.05 * max(n, threshold):
        rel = abs(mean_tail - next_eig) / max(abs(mean_tail), abs(next_eig), 1e-300)
        logger.debug("noise estimate near regime cutoff (p ln^4 = %.6g, "
                     "n = %d): tail mean %.17g vs next eigenvalue %.17g, "
                     "relative difference %.3g", threshold, n, mean_tail,
                     next_eig, rel)
    return mean_tail if _large_p(n, p) else next_eig


def gamma_hat_pca(eigenvalues, r, k, n, p):
    """Empirical Stieltjes-type correction for the k-th eigenvalue."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if not 0 <= r < p:
        raise ValueError(f"rank {r} outside [0, {p})")
    if not 0 <= k < r:
        raise ValueError(f"index {k} outside [0, {r})")
    hi = min(p - r, n)
    if hi <= r:
        return 0.0
    tail = eigenvalues[r:hi]
    gaps = eigenvalues[k] - tail
    _require_separated(gaps, eigenvalues[k], "eigenvalue correction")
    return float(np.sum(tail / gaps) / n)


def _require_separated(gaps, scale, context):
    if gaps.size and np.min(np.abs(gaps)) < _REL_TOL * max(1.0, abs(scale)):
        raise DegenerateGapError(
            f"eigenvalue gap below resolution while computing {context}")


def debias_eigenvalue_pca(eigenvalues, r, k, n, p):
    """Correct the k-th sample eigenvalue for high-dimensional inflation."""
    gamma = gamma_hat_pca(eigenvalues, r, k, n, p)
    denom = 1.0 + gamma
    if denom <= _REL_TOL:
        raise DegenerateCorrectionError(
            f"eigenvalue correction denominator {denom!r} not positive")
    return float(eigenvalues[k] / denom)


def bias_pca(eigenvalues, r, j, n, p, sigma2_hat):
    """Second-order alignment bias of the j-th sample eigenvector.

    The two sampling regimes use different expansions; with zero noise
    and matching spectra they agree exactly.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if not 0 <= r < p:
        raise ValueError(f"rank {r} outside [0, {p})")
    if not 0 <= j < r:
        raise ValueError(f"index {j} outside [0, {r})")
    if not sigma2_hat >= 0.0:
        raise ValueError(
            f"noise variance must be nonnegative, got {sigma2_hat!r}")
    lam_j = eigenvalues[j]
    if n >= p:
        # Zero-padding the spectrum up to length n adds nothing to either
        # sum, so only the observed tail is materialized.
        tail = eigenvalues[r:]
        scale = max(1.0, float(np.max(np.abs(eigenvalues))))
        if n > p and abs(lam_j) < _REL_TOL * scale:
            raise DegenerateGapError(
                "eigenvalue too close to the padded zeros of the spectrum")
        gaps = lam_j - tail
        _require_separated(gaps, lam_j, "eigenvector bias")
        denom = n + float(np.sum(tail / gaps))
        if abs(denom) < _REL_TOL * max(1.0, n):
            raise DegenerateCorrectionError(
                f"bias expansion denominator {denom!r} vanished")
        t2 = float(np.sum(tail / gaps ** 2))
        return float(lam_j / denom * t2)
    tail = eigenvalues[r:n]
    bulk = sigma2_hat * p / n
    shift = lam_j - bulk
    if abs(shift) < _REL_TOL * max(1.0, abs(lam_j)):
        raise DegenerateCorrectionError(
            "eigenvalue sits on the estimated bulk edge")
    gaps = lam_j - tail
    _require_separated(gaps, lam_j, "eigenvector bias")
    denom = n + float(np.sum(tail / gaps))
    if abs(denom) < _REL_TOL * max(1.0, n):
        raise DegenerateCorrectionError(
            f"bias expansion denominator {denom!r} vanished")
    t2 = float(np.sum((tail - bulk) / gaps ** 2))
    return float(bulk / shift + lam_j / shift * (lam_j / denom) * t2)


@dataclass(frozen=True)
class PcaEstimates:
    """All plug-in quantities derived from one data matrix.

    Holds the full eigenvalue vector but only the leading r eigenvectors,
    so the p > n case never stores a p x p basis.
    """

    sigma2_hat: float
    gamma_hat: np.ndarray
    b_hat: np.ndarray
    lambda_check: np.ndarray
    eigenvalues: np.ndarray
    leading_vectors: np.ndarray
    n: int
    p: int

    @property
    def r(self):
        return self.leading_vectors.shape[1]

    def __post_init__(self):
        r = self.r
        for name in ("gamma_hat", "b_hat", "lambda_check"):
            if getattr(self, name).shape != (r,):
                raise ValueError(f"{name} must have length {r}")
        if self.eigenvalues.shape != (self.p,):
            raise ValueError("eigenvalues must have length p")
        if self.leading_vectors.shape[0] != self.p:
            raise ValueError("eigenvectors must have p rows")


def pca_estimates(x, r, *, eigenvalues=None, leading_vectors=None):
    """Noise, correction, bias, and debiased eigenvalues from data.

    A caller-supplied decomposition is used as given, so simulation code
    can keep its own sign alignment; otherwise columns get the canonical
    sign convention.
    """
    x = _check_data(x)
    p, n = x.shape
    if not 1 <= r <= min(p, n):
        raise ValueError(f"rank {r} outside [1, {min(p, n)}]")
    if r >= p:
        raise ValueError(f"rank {r} must leave a nonempty bulk, p = {p}")
    if eigenvalues is None or leading_vectors is None:
        eigenvalues, leading_vectors = pca_decomposition(x, r)
        leading_vectors = canonicalize_columns(leading_vectors)
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    sigma2_hat = estimate_noise_pca(eigenvalues, r, n, p)
    gamma = np.array([gamma_hat_pca(eigenvalues, r, k, n, p)
                      for k in range(r)])
    lam_check = np.array([debias_eigenvalue_pca(eigenvalues, r, k, n, p)
                          for k in range(r)])
    b_hat = np.array([bias_pca(eigenvalues, r, k, n, p, sigma2_hat)
                      for k in range(r)])
    return PcaEstimates(sigma2_hat, gamma, b_hat, lam_check, eigenvalues,
                        np.asarray(leading_vectors, dtype=float), n, p)


def variance_pca(est, a, j):
    """Plug-in standard deviation of the j-th eigenvector linear form."""
    if not 0 <= j < est.r:
        raise ValueError(f"index {j} outside [0, {est.r})")
    a = unit_direction(a, est.p)
    lam_check = est.lambda_check
    noise_gap = lam_check[j] - est.sigma2_hat
    if abs(noise_gap) < _REL_TOL * max(1.0, abs(lam_check[j])):
        raise DegenerateCorrectionError(
            "debiased eigenvalue indistinguishable from the noise level")
    proj = est.leading_vectors.T @ a
    tail_mass = max(0.0, float(a @ a - proj @ proj))
    others = np.arange(est.r) != j
    gaps = lam_check[j] - lam_check[others]
    _require_separated(gaps, lam_check[j], "variance estimation")
    spike = float(np.sum(lam_check[others] * lam_check[j]
                         * proj[others] ** 2 * (1.0 + est.b_hat[others])
                         / gaps ** 2))
    s2 = spike / est.n + (est.sigma2_hat * lam_check[j] * tail_mass
                          / (est.n * noise_gap ** 2))
    if s2 < 0.0:
        raise DegenerateCorrectionError(f"negative variance estimate {s2!r}")
    return float(np.sqrt(s2))


def _diagnostics(est, j, s_hat_val):
    diag = {"sigma2_hat": est.sigma2_hat}
    for k in range(est.r):
        diag[f"gamma_hat_{k + 1}"] = float(est.gamma_hat[k])
    diag["b_hat_j"] = float(est.b_hat[j])
    for k in range(est.r):
        diag[f"lambda_check_{k + 1}"] = float(est.lambda_check[k])
    diag["s_hat"] = s_hat_val
    return diag


def _point_factor(est, j):
    scaled = 1.0 + est.b_hat[j]
    if scaled < 0.0:
        raise DegenerateCorrectionError(
            f"alignment correction 1 + b = {scaled!r} is negative")
    return float(np.sqrt(scaled))


def ci_pca(x, r, j, a, alpha=0.05, *, est=None):
    """Debiased interval for the linear form a' u_j."""
    if est is None:
        est = pca_estimates(x, r)
    a = unit_direction(a, est.p)
    s = variance_pca(est, a, j)
    point = float(est.leading_vectors[:, j] @ a) * _point_factor(est, j)
    return build_interval(point, s, alpha, _diagnostics(est, j, s))


def ci_pca_entrywise(x, r, j, i, alpha=0.05, *, est=None):
    """Interval for the i-th entry of u_j; no alignment debiasing."""
    if est is None:
        est = pca_estimates(x, r)
    if not 0 <= i < est.p:
        raise ValueError(f"entry index {i} outside [0, {est.p})")
    a = np.zeros(est.p)
    a[i] = 1.0
    s = variance_pca(est, a, j)
    point = float(est.leading_vectors[i, j])
    return build_interval(point, s, alpha, _diagnostics(est, j, s))
