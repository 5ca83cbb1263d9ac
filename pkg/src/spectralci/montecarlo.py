"""Coverage and distributional simulations over spiked-spectrum grids.

Each grid cell fixes one ground-truth model (seed stream 0) and draws
independent noise replicates (stream k for replicate k). BLAS threading
is pinned to one thread while replicates run, so results are a pure
function of configuration and seed regardless of scheduling.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from .denoising import bias_md, ci_md, ci_md_entrywise
from .exceptions import NumericError
from .inference import unit_direction
from .linalg import Ordering, normal_cdf, sym_eig
from .models import (GroundTruthMD, GroundTruthPCA, goe_sample, pca_sample,
                     random_orthonormal_frame)
from .pca import bias_pca, ci_pca, ci_pca_entrywise, pca_decomposition, pca_estimates
from .rng import Seed
from .theory import TheoryContext, s_md_theoretical, s_pca_theoretical

__all__ = ["McConfigMD", "McConfigPCA", "McSummary", "LAMBDA_MULTS",
           "DELTA_MULTS", "resolve_direction", "md_spectrum", "pca_spectrum",
           "run_md_cell", "run_pca_cell", "ks_to_normal", "md_grid",
           "pca_grid", "run_grid", "emit_summary", "parse_summary",
           "write_histogram_svg", "emit_ks_curve"]

LAMBDA_MULTS = (2.0, 4.0, 6.0)
DELTA_MULTS = (1.0, 2.0, 3.0)


@dataclass(frozen=True)
class McConfigMD:
    """One additive-noise cell: spectrum multipliers plus run controls."""

    n: int = 200
    r: int = 3
    sigma: float = 1.0
    lambda_min_mult: float = 2.0
    delta_mult: float = 1.0
    reps: int = 200
    alpha: float = 0.05
    base_seed: int = 0
    a_spec: object = "constant"


@dataclass(frozen=True)
class McConfigPCA:
    """One covariance cell: spectrum multipliers plus run controls."""

    n: int = 300
    p: int = 200
    r: int = 3
    sigma2: float = 1.0
    lambda_min_mult: float = 2.0
    delta_mult: float = 1.0
    reps: int = 200
    alpha: float = 0.05
    base_seed: int = 0
    a_spec: object = "constant"


@dataclass(frozen=True)
class McSummary:
    """Per-cell coverage and normality results, replicate order preserved."""

    coverage_mean: float
    coverage_std: float
    ks_biased: float
    ks_debiased: float
    stats_biased: np.ndarray
    stats_debiased: np.ndarray
    reps: int
    per_rep: tuple = None


def resolve_direction(a_spec, dim):
    """Turn a direction spec into (unit vector, entry index or None).

    "constant" gives the flat unit vector; ("coord", i) selects the i-th
    coordinate and switches the cell to entrywise intervals; anything
    array-like is validated as an explicit unit direction.
    """
    if isinstance(a_spec, str):
        if a_spec == "constant":
            return np.full(dim, dim ** -0.5), None
        raise ValueError(f"unknown direction spec {a_spec!r}")
    if isinstance(a_spec, tuple) and len(a_spec) == 2 and a_spec[0] == "coord":
        i = int(a_spec[1])
        if not 0 <= i < dim:
            raise ValueError(f"coordinate {i} outside [0, {dim})")
        a = np.zeros(dim)
        a[i] = 1.0
        return a, i
    return unit_direction(np.asarray(a_spec, dtype=float), dim), None


def _spiked_spectrum(r, lam_min, delta):
    lam = np.full(r, lam_min)
    lam[0] = 5.0 * lam_min
    if r >= 2:
        lam[1] = lam[0] - delta
    return lam


def md_spectrum(cfg):
    """Spectrum with top eigenvalue 5x the floor and a controlled top gap."""
    lam_min = cfg.lambda_min_mult * math.sqrt(cfg.n) * cfg.sigma
    delta = cfg.delta_mult * math.log(cfg.n) * cfg.sigma
    return _spiked_spectrum(cfg.r, lam_min, delta)


def pca_spectrum(cfg):
    """Covariance spikes with a gap scaled to the sampling fluctuation."""
    lam_min = cfg.lambda_min_mult * math.log(cfg.n) * cfg.sigma2
    delta = (cfg.delta_mult * (lam_min + cfg.sigma2) * math.log(cfg.n)
             / math.sqrt(cfg.n))
    return _spiked_spectrum(cfg.r, lam_min, delta)


def _guarded(one_rep, cfg, k):
    try:
        return one_rep(k)
    except NumericError as exc:
        raise type(exc)(
            f"replicate failed (base_seed={cfg.base_seed}, stream={k}): {exc}"
        ) from exc


def _run_reps(one_rep, cfg, threads):
    if cfg.reps < 1:
        raise ValueError(f"replicate count must be positive, got {cfg.reps}")
    if threads < 1:
        raise ValueError(f"thread count must be positive, got {threads}")
    streams = range(1, cfg.reps + 1)
    with threadpool_limits(limits=1):
        if threads == 1:
            return [_guarded(one_rep, cfg, k) for k in streams]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda k: _guarded(one_rep, cfg, k), streams))


def _summarize(rows, reps, keep_per_rep):
    stats_biased = np.array([row[0] for row in rows])
    stats_debiased = np.array([row[1] for row in rows])
    covered = np.array([row[2] for row in rows], dtype=bool)
    coverage = float(np.mean(covered))
    std = math.sqrt(coverage * (1.0 - coverage) / reps)
    per_rep = None
    if keep_per_rep:
        per_rep = tuple(
            {"stream": index + 1, "stat_biased": float(row[0]),
             "stat_debiased": float(row[1]), "covered": bool(row[2]),
             "point": row[3].point, "lower": row[3].lower,
             "upper": row[3].upper}
            for index, row in enumerate(rows))
    return McSummary(coverage, std, ks_to_normal(stats_biased),
                     ks_to_normal(stats_debiased), stats_biased,
                     stats_debiased, reps, per_rep)


def run_md_cell(cfg, threads=1, keep_per_rep=False):
    """Coverage and statistic distribution for one additive-noise cell.

    The debiased statistic uses the true noise level, matching the
    population quantity the limit theorem standardizes; the intervals
    themselves are fully data-driven.
    """
    base = Seed(cfg.base_seed)
    a, entry = resolve_direction(cfg.a_spec, cfg.n)
    u = random_orthonormal_frame(cfg.n, cfg.r, base)
    truth = GroundTruthMD(u, md_spectrum(cfg), cfg.sigma)
    signal = truth.s
    s_theory = s_md_theoretical(TheoryContext(truth, a, 0))
    target = float(truth.u[:, 0] @ a)
    sigma2_true = cfg.sigma ** 2

    def one_rep(k):
        s_hat = signal + goe_sample(cfg.n, cfg.sigma, base.child(k))
        dec = sym_eig(s_hat, Ordering.BY_MAGNITUDE_DESC)
        if float(dec.eigenvectors[:, 0] @ truth.u[:, 0]) < 0.0:
            dec = dec.flip_sign(0)
        overlap = float(dec.eigenvectors[:, 0] @ a)
        align = float(dec.eigenvectors[:, 0] @ truth.u[:, 0])
        stat_biased = (overlap - align * target) / s_theory
        bias = bias_md(dec, cfg.r, 0, sigma2_true)
        stat_debiased = (overlap * math.sqrt(1.0 + bias) - target) / s_theory
        if entry is None:
            result = ci_md(s_hat, cfg.r, 0, a, cfg.alpha, dec=dec)
        else:
            result = ci_md_entrywise(s_hat, cfg.r, 0, entry, cfg.alpha,
                                     dec=dec)
        covered = result.lower <= target <= result.upper
        return stat_biased, stat_debiased, covered, result

    rows = _run_reps(one_rep, cfg, threads)
    return _summarize(rows, cfg.reps, keep_per_rep)


def run_pca_cell(cfg, threads=1, keep_per_rep=False):
    """Coverage and statistic distribution for one covariance cell."""
    base = Seed(cfg.base_seed)
    a, entry = resolve_direction(cfg.a_spec, cfg.p)
    u = random_orthonormal_frame(cfg.p, cfg.r, base)
    truth = GroundTruthPCA(u, pca_spectrum(cfg), cfg.sigma2, n=cfg.n)
    s_theory = s_pca_theoretical(TheoryContext(truth, a, 0))
    target = float(truth.u[:, 0] @ a)

    def one_rep(k):
        x = pca_sample(truth, cfg.n, base.child(k))
        eigenvalues, vectors = pca_decomposition(x, cfg.r)
        if float(vectors[:, 0] @ truth.u[:, 0]) < 0.0:
            vectors = vectors.copy()
            vectors[:, 0] = -vectors[:, 0]
        overlap = float(vectors[:, 0] @ a)
        align = float(vectors[:, 0] @ truth.u[:, 0])
        stat_biased = (overlap - align * target) / s_theory
        bias = bias_pca(eigenvalues, cfg.r, 0, cfg.n, cfg.p, cfg.sigma2)
        stat_debiased = (overlap * math.sqrt(1.0 + bias) - target) / s_theory
        est = pca_estimates(x, cfg.r, eigenvalues=eigenvalues,
                            leading_vectors=vectors)
        if entry is None:
            result = ci_pca(x, cfg.r, 0, a, cfg.alpha, est=est)
        else:
            result = ci_pca_entrywise(x, cfg.r, 0, entry, cfg.alpha, est=est)
        covered = result.lower <= target <= result.upper
        return stat_biased, stat_debiased, covered, result

    rows = _run_reps(one_rep, cfg, threads)
    return _summarize(rows, cfg.reps, keep_per_rep)


def ks_to_normal(samples):
    """Kolmogorov-Smirnov distance to the standard normal."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("cannot compare an empty sample to a distribution")
    values = np.sort(samples.ravel())
    count = values.size
    cdf = normal_cdf(values)
    grid = np.arange(1, count + 1) / count
    return float(max(np.max(grid - cdf), np.max(cdf - (grid - 1.0 / count))))


def md_grid(base_seed=0, reps=200, alpha=0.05, a_spec="constant"):
    """The nine additive-noise cells, gap multiplier slowest.

    All cells share base_seed, hence one signal frame: the protocol
    draws the eigenvectors once and keeps them fixed throughout, with
    only the spectrum varying over the grid.
    """
    cells = []
    for delta_mult in DELTA_MULTS:
        for lambda_mult in LAMBDA_MULTS:
            cfg = McConfigMD(lambda_min_mult=lambda_mult,
                             delta_mult=delta_mult, reps=reps, alpha=alpha,
                             base_seed=base_seed, a_spec=a_spec)
            cells.append((f"md-d{delta_mult:g}-l{lambda_mult:g}", cfg))
    return cells


def pca_grid(base_seed=0, reps=200, alpha=0.05, a_spec="constant"):
    """The nine covariance cells, gap multiplier slowest.

    Shares one signal frame across cells, as in md_grid.
    """
    cells = []
    for delta_mult in DELTA_MULTS:
        for lambda_mult in LAMBDA_MULTS:
            cfg = McConfigPCA(lambda_min_mult=lambda_mult,
                              delta_mult=delta_mult, reps=reps, alpha=alpha,
                              base_seed=base_seed, a_spec=a_spec)
            cells.append((f"pca-d{delta_mult:g}-l{lambda_mult:g}", cfg))
    return cells


def run_grid(cells, threads=1):
    """Run (label, config) cells in order, returning (label, config, summary)."""
    results = []
    for label, cfg in cells:
        runner = run_md_cell if isinstance(cfg, McConfigMD) else run_pca_cell
        results.append((label, cfg, runner(cfg, threads=threads)))
    return results


_CSV_NOTE = ("# histograms: 30 equal-width bins on [-4, 4] in units of the "
             "theoretical standard deviation; overlay: standard normal "
             "density polyline")
_SUMMARY_HEADER = "label,coverage_mean,coverage_std,ks_biased,ks_debiased,reps"
_KS_HEADER = "label,delta_mult,lambda_min_mult,ks_biased,ks_debiased,reps"


def emit_summary(results, path, histogram_dir=None):
    """Write the per-cell summary CSV and optional statistic histograms."""
    lines = [_CSV_NOTE, _SUMMARY_HEADER]
    for label, _, summary in results:
        lines.append(",".join([
            label,
            "%.17g" % summary.coverage_mean,
            "%.17g" % summary.coverage_std,
            "%.17g" % summary.ks_biased,
            "%.17g" % summary.ks_debiased,
            "%d" % summary.reps]))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")
    if histogram_dir is None:
        return
    os.makedirs(histogram_dir, exist_ok=True)
    for label, _, summary in results:
        write_histogram_svg(summary.stats_biased,
                            os.path.join(histogram_dir, f"{label}-biased.svg"),
                            title=f"{label} biased")
        write_histogram_svg(summary.stats_debiased,
                            os.path.join(histogram_dir,
                                         f"{label}-debiased.svg"),
                            title=f"{label} debiased")


def parse_summary(path):
    """Read a summary CSV back into a list of per-cell dicts."""
    rows = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#") or line == _SUMMARY_HEADER:
                continue
            label, cov, std, ks_b, ks_d, reps = line.split(",")
            rows.append({"label": label, "coverage_mean": float(cov),
                         "coverage_std": float(std),
                         "ks_biased": float(ks_b),
                         "ks_debiased": float(ks_d), "reps": int(reps)})
    return rows


def write_histogram_svg(samples, path, title=""):
    """Render a density histogram with a standard normal overlay.

    Bin layout is fixed: 30 equal bins on [-4, 4], density normalized
    over the in-range samples, 480x320 canvas with a 40px margin.
    """
    samples = np.asarray(samples, dtype=float)
    counts, edges = np.histogram(samples, bins=30, range=(-4.0, 4.0))
    bin_width = edges[1] - edges[0]
    total = counts.sum()
    if total:
        density = counts / (total * bin_width)
    else:
        density = np.zeros(counts.shape)
    xs = np.linspace(-4.0, 4.0, 121)
    normal = np.exp(-xs ** 2 / 2.0) / math.sqrt(2.0 * math.pi)
    top = 1.05 * max(float(np.max(density)), float(np.max(normal)))

    def px(value):
        return 40.0 + (value + 4.0) / 8.0 * 400.0

    def py(dens):
        return 280.0 - dens / top * 240.0

    parts = ['<svg xmlns="http://www.w3.org/2000/svg" width="480" '
             'height="320" viewBox="0 0 480 320">',
             '<rect x="0" y="0" width="480" height="320" fill="white"/>']
    if title:
        parts.append('<text x="240" y="24" text-anchor="middle" '
                     'font-family="sans-serif" font-size="14">'
                     f'{title}</text>')
    bar = 400.0 / 30.0
    for i, dens in enumerate(density):
        if dens <= 0.0:
            continue
        x = px(edges[i])
        y = py(dens)
        parts.append(f'<rect x="{x:.3f}" y="{y:.3f}" width="{bar:.3f}" '
                     f'height="{280.0 - y:.3f}" fill="#9ecae1" '
                     'stroke="#4292c6" stroke-width="0.5"/>')
    points = " ".join(f"{px(v):.3f},{py(d):.3f}" for v, d in zip(xs, normal))
    parts.append(f'<polyline points="{points}" fill="none" stroke="#d62728" '
                 'stroke-width="1.5"/>')
    parts.append('<line x1="40" y1="280" x2="440" y2="280" stroke="black" '
                 'stroke-width="1"/>')
    for tick in range(-4, 5):
        x = px(float(tick))
        parts.append(f'<line x1="{x:.3f}" y1="280" x2="{x:.3f}" y2="284" '
                     'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{x:.3f}" y="298" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="10">{tick}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(parts) + "\n")


def emit_ks_curve(results, path):
    """Write per-cell KS distances with their grid coordinates."""
    lines = [_KS_HEADER]
    for label, cfg, summary in results:
        lines.append(",".join([
            label,
            "%g" % cfg.delta_mult,
            "%g" % cfg.lambda_min_mult,
            "%.17g" % summary.ks_biased,
            "%.17g" % summary.ks_debiased,
            "%d" % summary.reps]))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")
