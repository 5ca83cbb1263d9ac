"""Confidence intervals for linear forms of eigenvectors.

Two observation models are covered: a low-rank symmetric matrix under
additive Gaussian noise, and a spiked covariance matrix estimated from
Gaussian samples. Both get debiased point estimates, plug-in variances,
and two-sided normal intervals, along with the population-level
quantities and simulation harness used to validate them.
"""

from .denoising import (MdEstimates, bias_md, ci_md, ci_md_entrywise,
                        debias_eigenvalue_md, estimate_noise_md,
                        md_estimates, variance_md)
from .exceptions import (ConvergenceError, DegenerateCorrectionError,
                         DegenerateDrawError, DegenerateGapError,
                         NumericError, SingularResolventError)
from .inference import InferenceResult, build_interval, unit_direction
from .linalg import (Ordering, SpectralDecomposition, as_symmetric,
                     canonical_sign, canonicalize_columns, complement_basis,
                     normal_cdf, normal_quantile, rank_r_truncation,
                     sign_align, sym_eig)
from .matrixio import read_matrix, read_vector, write_matrix
from .models import (GroundTruthMD, GroundTruthPCA, gmmb_membership,
                     gmmb_signal, goe_sample, md_observation, pca_sample,
                     random_orthonormal_frame, spiked_cov)
from .montecarlo import (McConfigMD, McConfigPCA, McSummary, emit_ks_curve,
                         emit_summary, ks_to_normal, md_grid, parse_summary,
                         pca_grid, resolve_direction, run_grid, run_md_cell,
                         run_pca_cell, write_histogram_svg)
from .pca import (PcaEstimates, bias_pca, ci_pca, ci_pca_entrywise,
                  debias_eigenvalue_pca, estimate_noise_pca, gamma_hat_pca,
                  pca_decomposition, pca_estimates, variance_pca)
from .rng import Seed, standard_normal
from .theory import (TheoryContext, err_bias_md, err_bias_pca, err_md,
                     err_pca, gamma_md_oracle, gamma_pca_oracle,
                     s_md_theoretical, s_pca_theoretical)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "DegenerateCorrectionError", "DegenerateDrawError",
    "DegenerateGapError", "GroundTruthMD", "GroundTruthPCA",
    "InferenceResult", "McConfigMD", "McConfigPCA", "McSummary",
    "MdEstimates", "NumericError", "Ordering", "PcaEstimates", "Seed",
    "SingularResolventError", "SpectralDecomposition", "TheoryContext",
    "as_symmetric", "bias_md", "bias_pca", "build_interval",
    "canonical_sign", "canonicalize_columns", "ci_md", "ci_md_entrywise",
    "ci_pca", "ci_pca_entrywise", "complement_basis",
    "debias_eigenvalue_md", "debias_eigenvalue_pca", "emit_ks_curve",
    "emit_summary", "err_bias_md", "err_bias_pca", "err_md", "err_pca",
    "estimate_noise_md", "estimate_noise_pca", "gamma_hat_pca",
    "gamma_md_oracle", "gamma_pca_oracle", "gmmb_membership", "gmmb_signal",
    "goe_sample", "ks_to_normal", "md_estimates", "md_grid",
    "md_observation", "normal_cdf", "normal_quantile", "parse_summary",
    "pca_decomposition", "pca_estimates", "pca_grid", "pca_sample",
    "random_orthonormal_frame", "rank_r_truncation", "read_matrix",
    "read_vector", "resolve_direction", "run_grid", "run_md_cell",
    "run_pca_cell", "s_md_theoretical", "s_pca_theoretical", "sign_align",
    "spiked_cov", "standard_normal", "sym_eig", "unit_direction",
    "variance_md", "variance_pca", "write_histogram_svg", "write_matrix",
]
