"""Population-level variances, error rates, and resolvent oracles.

Everything here consumes ground-truth model objects, never data alone:
theoretical standard deviations of the linear-form statistics, the
first-order error rates they satisfy, and independent oracle values for
the eigenvalue corrections used by the plug-in estimators.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateGapError, SingularResolventError
from .inference import unit_direction
from .linalg import complement_basis
from .models import GroundTruthMD

__all__ = ["TheoryContext", "s_md_theoretical", "s_pca_theoretical",
           "err_md", "err_bias_md", "err_pca", "err_bias_pca",
           "gamma_md_oracle", "gamma_pca_oracle"]

_REL_TOL = 1e-10


@dataclass(frozen=True)
class TheoryContext:
    """A ground-truth model, a unit direction, and a target index."""

    truth: object
    a: np.ndarray
    j: int

    def __post_init__(self):
        dim = (self.truth.n if isinstance(self.truth, GroundTruthMD)
               else self.truth.p)
        object.__setattr__(self, "a", unit_direction(self.a, dim))
        if not 0 <= self.j < self.truth.r:
            raise ValueError(
                f"index {self.j} outside [0, {self.truth.r})")
        overlap = abs(float(self.truth.u[:, self.j] @ self.a))
        if overlap > 1.0 - 1e-10:
            raise ValueError(
                "direction coincides with the target eigenvector, the "
                "linear-form statistic degenerates")


def _blocks(lam, rtol=_REL_TOL):
    """Group eigenvalue indices whose values coincide up to rtol."""
    groups = []
    for i, value in enumerate(lam):
        for group in groups:
            anchor = lam[group[0]]
            if abs(value - anchor) <= rtol * max(1.0, abs(anchor)):
                group.append(i)
                break
        else:
            groups.append([i])
    return groups


def _block_terms(ctx):
    """Split the direction's mass over eigenvalue blocks around index j."""
    truth = ctx.truth
    lam = truth.lam
    groups = _blocks(lam)
    lam_j = lam[ctx.j]
    spike_terms = []
    for group in groups:
        if ctx.j in group:
            if len(group) > 1:
                raise DegenerateGapError(
                    f"eigenvalue at index {ctx.j} is not unique")
            continue
        mass = float(np.sum((truth.u[:, group].T @ ctx.a) ** 2))
        gap = lam_j - lam[group[0]]
        spike_terms.append((lam[group[0]], mass, gap))
    signal_mass = float(np.sum((truth.u.T @ ctx.a) ** 2))
    tail_mass = max(0.0, float(ctx.a @ ctx.a) - signal_mass)
    return lam_j, spike_terms, tail_mass


def s_md_theoretical(ctx):
    """Exact first-order standard deviation of the aligned linear form.

    For noise with off-diagonal variance sigma^2 the bilinear forms
    u_k' N u_j (k != j) have variance exactly sigma^2, so each mass
    term enters with coefficient sigma^2, not 2 sigma^2.
    """
    truth = ctx.truth
    lam_j, terms, tail_mass = _block_terms(ctx)
    sigma2 = truth.sigma ** 2
    spike = sum(mass / gap ** 2 for _, mass, gap in terms)
    return float(math.sqrt(sigma2 * (spike + tail_mass / lam_j ** 2)))


def s_pca_theoretical(ctx):
    """Exact first-order standard deviation for the covariance model."""
    truth = ctx.truth
    if truth.n is None:
        raise ValueError("theoretical variance needs the sample count n")
    lam_j, terms, tail_mass = _block_terms(ctx)
    sigma2 = truth.sigma2
    n = truth.n
    spike = sum((lam_j + sigma2) * (lam_k + sigma2) * mass / (n * gap ** 2)
                for lam_k, mass, gap in terms)
    tail = (lam_j + sigma2) * sigma2 * tail_mass / (n * lam_j ** 2)
    return float(math.sqrt(spike + tail))


def err_md(truth, j):
    """First-order relative error rate of the aligned linear form."""
    n = truth.n
    r = truth.r
    sigma = truth.sigma
    log_n = math.log(n)
    return (r * sigma * math.sqrt(n * log_n) / truth.lambda_min
            + r ** 1.5 * sigma * log_n / truth.eigengap(j)
            + n ** -9.0)


def err_bias_md(truth, j):
    """Error rate of the bias correction term itself."""
    n = truth.n
    sigma2 = truth.sigma ** 2
    log_n = math.log(n)
    return (sigma2 * truth.r * log_n / truth.eigengap(j) ** 2
            + sigma2 * math.sqrt(n * log_n) / truth.lam[j] ** 2)


def err_pca(truth, j):
    """First-order relative error rate for the covariance model."""
    if truth.n is None:
        raise ValueError("error rate needs the sample count n")
    n, p, r = truth.n, truth.p, truth.r
    sigma2 = truth.sigma2
    sigma = math.sqrt(sigma2)
    kappa = truth.kappa
    lam_j = truth.lam[j]
    log_np = math.log(max(n, p))
    ratio = p / n
    first = (kappa ** 1.5 * r * log_np ** 3
             * (sigma2 / lam_j * (ratio + math.sqrt(ratio)
                                  + math.sqrt(log_np / n))
                + sigma / math.sqrt(lam_j) * math.sqrt(ratio)))
    second = (kappa * r ** 2.5 * log_np ** 2.5
              * (truth.lambda_max + sigma2)
              / (truth.eigengap(j) * math.sqrt(n)))
    third = kappa ** 2 * r ** 1.5 * log_np ** 2.5 / math.sqrt(n)
    return first + second + third


def err_bias_pca(truth, j):
    """Error rate of the covariance-model bias correction."""
    if truth.n is None:
        raise ValueError("error rate needs the sample count n")
    n, p, r = truth.n, truth.p, truth.r
    sigma2 = truth.sigma2
    sigma = math.sqrt(sigma2)
    kappa = truth.kappa
    lam_j = truth.lam[j]
    log_np = math.log(max(n, p))
    ratio = math.sqrt(p / n)
    first = ((truth.lambda_max + sigma2) * (lam_j + sigma2) * r * log_np
             / (truth.eigengap(j) ** 2 * n))
    prefactor = sigma * math.sqrt(lam_j + sigma2) / (lam_j * math.sqrt(n))
    inner = (sigma * kappa * math.sqrt(r) * log_np ** 2
             / math.sqrt(truth.lambda_min) * ratio
             + sigma2 * math.sqrt(r * kappa) * log_np ** 2
             / truth.lambda_min * ratio)
    return first + prefactor * inner


def _perp_frame(truth):
    return complement_basis(truth.u)


def _resolvent_inverse(lambda_hat_j, m):
    shifted = lambda_hat_j * np.eye(m.shape[0]) - m
    try:
        inv = np.linalg.inv(shifted)
    except np.linalg.LinAlgError as exc:
        raise SingularResolventError(
            f"resolvent at {lambda_hat_j!r} is singular") from exc
    residual = float(np.max(np.abs(shifted @ inv - np.eye(m.shape[0]))))
    if residual > 1e-6:
        raise SingularResolventError(
            f"resolvent inversion residual {residual!r} too large")
    return inv


def _check_method(method):
    if method not in ("eigen", "resolvent"):
        raise ValueError(f"unknown oracle method {method!r}")


def gamma_md_oracle(lambda_hat_j, truth, noise, method="eigen"):
    """Exact eigenvalue shift via the complement-restricted resolvent.

    The eigen route sums over the complement spectrum directly; the
    resolvent route inverts the shifted matrix. Both must agree.
    """
    _check_method(method)
    u_perp = _perp_frame(truth)
    m = u_perp.T @ np.asarray(noise, dtype=float) @ u_perp
    sigma2 = truth.sigma ** 2
    if method == "eigen":
        mu = np.linalg.eigvalsh(m)
        gaps = lambda_hat_j - mu
        if gaps.size and np.min(np.abs(gaps)) < _REL_TOL * max(
                1.0, abs(lambda_hat_j)):
            raise SingularResolventError(
                f"oracle evaluation point {lambda_hat_j!r} hits the "
                "complement spectrum")
        return float(sigma2 * np.sum(1.0 / gaps))
    inv = _resolvent_inverse(lambda_hat_j, m)
    return float(sigma2 * np.trace(inv))


def gamma_pca_oracle(lambda_hat_j, truth, x, method="eigen"):
    """Exact correction from the complement-projected sample covariance."""
    _check_method(method)
    if truth.n is None:
        raise ValueError("oracle needs the sample count n")
    x = np.asarray(x, dtype=float)
    u_perp = _perp_frame(truth)
    z = u_perp.T @ x
    m = z @ z.T / truth.n
    if method == "eigen":
        mu = np.linalg.eigvalsh(m)
        gaps = lambda_hat_j - mu
        if gaps.size and np.min(np.abs(gaps)) < _REL_TOL * max(
                1.0, abs(lambda_hat_j)):
            raise SingularResolventError(
                f"oracle evaluation point {lambda_hat_j!r} hits the "
                "complement spectrum")
        return float(np.sum(mu / gaps) / truth.n)
    inv = _resolvent_inverse(lambda_hat_j, m)
    return float(np.trace(inv @ m) / truth.n)
