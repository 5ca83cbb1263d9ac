"""Ground-truth objects and seeded generators for the two observation
models: a low-rank symmetric signal in additive Gaussian orthogonal
noise, and i.i.d. samples from a spiked covariance.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateDrawError
from .rng import Seed, standard_normal

__all__ = [
    "GroundTruthMD",
    "GroundTruthPCA",
    "goe_sample",
    "md_observation",
    "random_orthonormal_frame",
    "gmmb_membership",
    "gmmb_signal",
    "spiked_cov",
    "pca_sample",
]

_SQRT2 = np.sqrt(2.0)
_ORTHO_TOL = 1e-10
# initial draw plus 16 redraws before a residual is declared degenerate
_MAX_DRAWS = 17


def _checked_frame(u, what):
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[0] < u.shape[1]:
        raise ValueError(f"{what} must be a tall matrix of orthonormal columns, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError(f"{what} contains non-finite entries")
    gram = u.T @ u
    err = float(np.max(np.abs(gram - np.eye(u.shape[1])))) if u.shape[1] else 0.0
    if err > _ORTHO_TOL:
        raise ValueError(f"{what} columns are not orthonormal (max Gram deviation {err:.3e})")
    return u


@dataclass(frozen=True)
class GroundTruthMD:
    """Rank-r signal S = U diag(lam) U' plus the noise level sigma.

    The signal matrix is reconstructed on demand from (U, lam), so the
    factorization is exact by construction.
    """

    u: np.ndarray
    lam: np.ndarray
    sigma: float

    def __post_init__(self):
        u = _checked_frame(self.u, "u")
        lam = np.asarray(self.lam, dtype=float)
        if lam.shape != (u.shape[1],):
            raise ValueError(f"lam must have one entry per column of u, got shape {lam.shape}")
        if not np.all(np.isfinite(lam)) or np.any(lam == 0.0):
            raise ValueError("signal eigenvalues must be finite and nonzero")
        if not (np.isfinite(self.sigma) and self.sigma >= 0.0):
            raise ValueError(f"sigma must be a nonnegative real, got {self.sigma!r}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def n(self):
        return int(self.u.shape[0])

    @property
    def r(self):
        return int(self.u.shape[1])

    @property
    def s(self):
        """The signal matrix U diag(lam) U'."""
        return (self.u * self.lam) @ self.u.T

    @property
    def lambda_min(self):
        return float(np.min(np.abs(self.lam)))

    @property
    def lambda_max(self):
        return float(np.max(np.abs(self.lam)))

    @property
    def kappa(self):
        return self.lambda_max / self.lambda_min

    def eigengap(self, j):
        """Distance from lam[j] to the nearest other signal eigenvalue.

        With a single spike the convention is |lam[0]|.
        """
        return _eigengap(self.lam, j)


@dataclass(frozen=True)
class GroundTruthPCA:
    """Spiked covariance Sigma = U diag(lam) U' + sigma2 I.

    ``n`` optionally records the sample count; the theoretical variance
    and error-bound formulas require it.
    """

    u: np.ndarray
    lam: np.ndarray
    sigma2: float
    n: int | None = None

    def __post_init__(self):
        u = _checked_frame(self.u, "u")
        lam = np.asarray(self.lam, dtype=float)
        if lam.shape != (u.shape[1],):
            raise ValueError(f"lam must have one entry per column of u, got shape {lam.shape}")
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0.0):
            raise ValueError("spike eigenvalues must be finite and positive")
        if np.any(np.diff(lam) > 0.0):
            raise ValueError("spike eigenvalues must be nonincreasing")
        if not (np.isfinite(self.sigma2) and self.sigma2 >= 0.0):
            raise ValueError(f"sigma2 must be a nonnegative real, got {self.sigma2!r}")
        if self.n is not None and int(self.n) < 1:
            raise ValueError(f"n must be a positive sample count, got {self.n!r}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "sigma2", float(self.sigma2))
        object.__setattr__(self, "n", None if self.n is None else int(self.n))

    @property
    def p(self):
        return int(self.u.shape[0])

    @property
    def r(self):
        return int(self.u.shape[1])

    @property
    def sigma0(self):
        """The rank-r spike matrix U diag(lam) U'."""
        return (self.u * self.lam) @ self.u.T

    @property
    def cov(self):
        """The full covariance Sigma0 + sigma2 I."""
        return self.sigma0 + self.sigma2 * np.eye(self.p)

    @property
    def lambda_min(self):
        return float(np.min(self.lam))

    @property
    def lambda_max(self):
        return float(np.max(self.lam))

    @property
    def kappa(self):
        return self.lambda_max / self.lambda_min

    def eigengap(self, j):
        return _eigengap(self.lam, j)


def _eigengap(lam, j):
    if not 0 <= j < lam.size:
        raise ValueError(f"eigenvalue index must lie in [0, {lam.size}), got {j}")
    if lam.size == 1:
        return float(np.abs(lam[0]))
    others = np.delete(lam, j)
    return float(np.min(np.abs(lam[j] - others)))


def goe_sample(n, sigma, seed):
    """One Gaussian orthogonal matrix: off-diagonal entries N(0, sigma^2),
    diagonal N(0, 2 sigma^2), symmetric.

    Built as sigma (G + G')/sqrt(2) for i.i.d. standard normal G, which
    has exactly that covariance structure.  sigma = 0 returns zeros.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"dimension must be at least 1, got {n}")
    if not (np.isfinite(sigma) and sigma >= 0.0):
        raise ValueError(f"sigma must be a nonnegative real, got {sigma!r}")
    g = standard_normal(seed.generator(), (n, n))
    return (sigma / _SQRT2) * (g + g.T)


def md_observation(truth, seed):
    """The observed matrix: signal plus a fresh noise draw."""
    return truth.s + goe_sample(truth.n, truth.sigma, seed)


def random_orthonormal_frame(n, r, seed):
    """Orthonormal columns built sequentially from U(-1, 1) draws.

    Each column is drawn entrywise uniform on (-1, 1), projected against
    the previous columns, and normalized.  A residual below 1e-12 is
    redrawn; the budget is 16 redraws per column.
    """
    n, r = int(n), int(r)
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    rng = seed.generator()
    u = np.empty((n, r))
    for k in range(r):
        for _ in range(_MAX_DRAWS):
            v = 2.0 * rng.random(n) - 1.0
            v -= u[:, :k] @ (u[:, :k].T @ v)
            norm = float(np.linalg.norm(v))
            if norm >= 1e-12:
                break
        else:
            raise DegenerateDrawError(
                f"column {k}: residual below 1e-12 after {_MAX_DRAWS} draws")
        u[:, k] = v / norm
    return u


def gmmb_membership(n, alpha):
    """Two-community membership matrix with a mixed tail.

    The two pure blocks get floor((1 - alpha) n / 2) rows each of (1, 0)
    and (0, 1); every remaining row is (1/2, 1/2).
    """
    n = int(n)
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    pure = int(np.floor((1.0 - alpha) * n / 2.0))
    if pure < 1:
        raise ValueError(f"community partition is empty: floor((1-alpha)n/2) = {pure}")
    z = np.zeros((n, 2))
    z[:pure, 0] = 1.0
    z[pure:2 * pure, 1] = 1.0
    z[2 * pure:, :] = 0.5
    return z


def gmmb_signal(n, alpha, lam, eps, v=None, sigma=1.0):
    """Rank-2 mixed-membership block signal S = Z B Z'/n as ground truth.

    B = V diag(lam + eps, lam) V'.  The eigenpairs are computed exactly
    from the 2x2 compression of S, so the returned truth never depends
    on the closed form U = Z (Z'Z)^{-1/2} V, which is exact only when B
    commutes with Z'Z.

    Parameters
    ----------
    n : int
    alpha : float in [0, 1)
        Fraction of mixed-membership rows.
    lam, eps : float
        Community eigenvalue and eigengap; lam > 0, eps >= 0.
    v : (2, 2) array, optional
        Orthonormal mixing matrix; identity by default.
    sigma : float, optional
        Noise level stored on the returned truth.
    """
    if not lam > 0.0:
        raise ValueError(f"lam must be positive, got {lam}")
    if not eps >= 0.0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    z = gmmb_membership(n, alpha)
    if v is None:
        v = np.eye(2)
    else:
        v = _checked_frame(np.asarray(v, dtype=float), "v")
        if v.shape != (2, 2):
            raise ValueError(f"v must be 2x2, got shape {v.shape}")
    b = (v * np.array([lam + eps, lam])) @ v.T
    gram = z.T @ z
    vals, vecs = np.linalg.eigh(gram)
    if vals[0] <= 0.0:
        raise ValueError("membership matrix is rank deficient")
    root = (vecs * np.sqrt(vals)) @ vecs.T
    inv_root = (vecs / np.sqrt(vals)) @ vecs.T
    middle = root @ b @ root / n
    mu, q = np.linalg.eigh(middle)
    order = np.argsort(-np.abs(mu), kind="stable")
    mu = mu[order]
    q = q[:, order]
    return GroundTruthMD(u=z @ inv_root @ q, lam=mu, sigma=sigma)


def spiked_cov(u, lam, sigma2, n=None):
    """Spiked covariance ground truth from its factors.

    ``n`` records the sample count for downstream variance formulas.
    """
    return GroundTruthPCA(u=np.asarray(u, dtype=float),
                          lam=np.asarray(lam, dtype=float),
                          sigma2=sigma2, n=n)


def pca_sample(truth, n, seed):
    """A p x n matrix of i.i.d. N(0, Sigma) columns.

    Uses the spike representation of the square root,
    Sigma^{1/2} = sigma I + U (sqrt(lam + sigma2) - sigma) U',
    so no p x p factorization is formed.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"sample count must be at least 1, got {n}")
    y = standard_normal(seed.generator(), (truth.p, n))
    sigma = float(np.sqrt(truth.sigma2))
    scale = np.sqrt(truth.lam + truth.sigma2) - sigma
    return sigma * y + truth.u @ (scale[:, None] * (truth.u.T @ y))
