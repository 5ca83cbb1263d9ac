"""Shared confidence-interval container and assembly helpers."""

from dataclasses import dataclass, field

import numpy as np

from .linalg import normal_quantile

__all__ = ["InferenceResult", "build_interval", "unit_direction"]


@dataclass(frozen=True)
class InferenceResult:
    """A two-sided normal confidence interval for one linear form.

    diagnostics carries named intermediate estimates (noise variance,
    bias, debiased eigenvalues) for inspection and serialization.
    """

    point: float
    s_hat: float
    lower: float
    upper: float
    alpha: float
    diagnostics: dict = field(default_factory=dict)


def build_interval(point, s_hat, alpha, diagnostics=None):
    """Assemble point +- normal_quantile(1 - alpha/2) * s_hat."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not s_hat >= 0.0:
        raise ValueError(f"s_hat must be nonnegative, got {s_hat!r}")
    half = normal_quantile(1.0 - alpha / 2.0) * s_hat
    return InferenceResult(float(point), float(s_hat), float(point - half),
                           float(point + half), float(alpha),
                           dict(diagnostics or {}))


def unit_direction(a, dim):
    """Validate a finite unit vector of the given length."""
    a = np.asarray(a, dtype=float)
    if a.shape != (dim,):
        raise ValueError(f"direction must have shape ({dim},), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("direction contains non-finite entries")
    norm = float(np.linalg.norm(a))
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"direction must have unit norm, got {norm!r}")
    return a
