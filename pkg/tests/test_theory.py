"""Population variances, error rates, and resolvent oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectralci import (
    DegenerateGapError,
    GroundTruthMD,
    Seed,
    SingularResolventError,
    TheoryContext,
    err_bias_md,
    err_bias_pca,
    err_md,
    err_pca,
    gamma_md_oracle,
    gamma_pca_oracle,
    pca_sample,
    random_orthonormal_frame,
    s_md_theoretical,
    s_pca_theoretical,
    spiked_cov,
)
from spectralci.montecarlo import McConfigMD, md_spectrum


def _diag_md_truth(lam, sigma, n=6):
    lam = np.asarray(lam, dtype=float)
    return GroundTruthMD(u=np.eye(n)[:, :lam.size], lam=lam, sigma=sigma)


def _basis(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


class TestContext:
    def test_rejects_non_unit_direction(self):
        truth = _diag_md_truth([8.0, 3.0], 0.7)
        with pytest.raises(ValueError, match="unit norm"):
            TheoryContext(truth=truth, a=np.full(6, 0.5), j=0)

    def test_rejects_out_of_range_index(self):
        truth = _diag_md_truth([8.0, 3.0], 0.7)
        with pytest.raises(ValueError, match="outside"):
            TheoryContext(truth=truth, a=_basis(6, 3), j=2)

    def test_rejects_target_eigenvector_both_signs(self):
        truth = _diag_md_truth([8.0, 3.0], 0.7)
        for sign in (1.0, -1.0):
            with pytest.raises(ValueError, match="coincides"):
                TheoryContext(truth=truth, a=sign * _basis(6, 0), j=0)


class TestLinearFormStdMD:
    def test_single_spike_direction(self):
        truth = _diag_md_truth([8.0, 3.0], 0.7)
        ctx = TheoryContext(truth=truth, a=_basis(6, 1), j=0)
        assert s_md_theoretical(ctx) == pytest.approx(0.14, rel=1e-12)

    def test_tail_only_direction(self):
        truth = _diag_md_truth([8.0, 3.0], 0.7)
        ctx = TheoryContext(truth=truth, a=_basis(6, 3), j=0)
        assert s_md_theoretical(ctx) == pytest.approx(0.0875, rel=1e-12)

    def test_mixed_direction(self):
        truth = _diag_md_truth([8.0, 3.0], 0.7)
        a = (_basis(6, 1) + _basis(6, 2) + _basis(6, 3)) / math.sqrt(3.0)
        ctx = TheoryContext(truth=truth, a=a, j=0)
        assert s_md_theoretical(ctx) == pytest.approx(
            0.10787724505195709, rel=1e-12)

    def test_tied_target_eigenvalue_rejected(self):
        truth = _diag_md_truth([8.0, 8.0 * (1.0 - 1e-13)], 0.7)
        ctx = TheoryContext(truth=truth, a=_basis(6, 3), j=0)
        with pytest.raises(DegenerateGapError, match="not unique"):
            s_md_theoretical(ctx)

    def test_coincident_other_eigenvalues_form_one_block(self):
        truth = _diag_md_truth([8.0, 3.0, 3.0 * (1.0 + 1e-13)], 0.7)
        a = (_basis(6, 1) + _basis(6, 2)) / math.sqrt(2.0)
        ctx = TheoryContext(truth=truth, a=a, j=0)
        assert s_md_theoretical(ctx) == pytest.approx(0.14, rel=1e-12)

    @given(st.floats(0.125, 8.0))
    @settings(max_examples=25, deadline=None)
    def test_invariant_under_joint_rescaling(self, scale):
        # sigma and the spectrum enter only through their ratio.
        base = _diag_md_truth([8.0, 3.0], 0.7)
        scaled = _diag_md_truth([8.0 * scale, 3.0 * scale], 0.7 * scale)
        a = (_basis(6, 1) + _basis(6, 4)) / math.sqrt(2.0)
        s_base = s_md_theoretical(TheoryContext(truth=base, a=a, j=0))
        s_scaled = s_md_theoretical(TheoryContext(truth=scaled, a=a, j=0))
        assert s_scaled == pytest.approx(s_base, rel=1e-12)


class TestLinearFormStdPCA:
    def _truth(self, n=50):
        u = np.eye(5)[:, :2]
        return spiked_cov(u, np.array([6.0, 2.0]), 0.5, n=n)

    def test_term_by_term(self):
        truth = self._truth()
        a = (_basis(5, 1) + _basis(5, 3)) / math.sqrt(2.0)
        ctx = TheoryContext(truth=truth, a=a, j=0)
        spike = 6.5 * 2.5 * 0.5 / (50.0 * 16.0)
        tail = 6.5 * 0.5 * 0.5 / (50.0 * 36.0)
        assert s_pca_theoretical(ctx) == pytest.approx(
            math.sqrt(spike + tail), rel=1e-12)
        assert s_pca_theoretical(ctx) == pytest.approx(
            0.10516191220103302, rel=1e-12)

    def test_requires_sample_count(self):
        u = np.eye(5)[:, :2]
        truth = spiked_cov(u, np.array([6.0, 2.0]), 0.5)
        ctx = TheoryContext(truth=truth, a=_basis(5, 3), j=0)
        with pytest.raises(ValueError, match="sample count"):
            s_pca_theoretical(ctx)

    def test_scales_as_inverse_root_n(self):
        a = (_basis(5, 1) + _basis(5, 3)) / math.sqrt(2.0)
        s_small = s_pca_theoretical(
            TheoryContext(truth=self._truth(n=50), a=a, j=0))
        s_large = s_pca_theoretical(
            TheoryContext(truth=self._truth(n=200), a=a, j=0))
        assert s_small / s_large == pytest.approx(2.0, rel=1e-12)


class TestErrorRates:
    def _md_truth(self):
        lam = md_spectrum(McConfigMD(lambda_min_mult=6.0, delta_mult=3.0))
        u = random_orthonormal_frame(200, 3, Seed(71))
        return GroundTruthMD(u=u, lam=lam, sigma=1.0)

    def test_md_rate_value(self):
        assert err_md(self._md_truth(), 0) == pytest.approx(
            2.8829545140695598, rel=1e-12)

    def test_md_bias_rate_value(self):
        assert err_bias_md(self._md_truth(), 0) == pytest.approx(
            0.063093902342664803, rel=1e-12)

    def test_pca_rate_value(self):
        u = random_orthonormal_frame(200, 1, Seed(72))
        truth = spiked_cov(u, np.array([9.0]), 1.0, n=300)
        assert err_pca(truth, 0) == pytest.approx(
            93.396513925359331, rel=1e-10)

    def test_pca_bias_rate_value(self):
        u = random_orthonormal_frame(200, 1, Seed(72))
        truth = spiked_cov(u, np.array([9.0]), 1.0, n=300)
        assert err_bias_pca(truth, 0) == pytest.approx(
            0.26296634863259136, rel=1e-10)

    def test_pca_rates_require_sample_count(self):
        u = random_orthonormal_frame(20, 1, Seed(73))
        truth = spiked_cov(u, np.array([9.0]), 1.0)
        with pytest.raises(ValueError, match="sample count"):
            err_pca(truth, 0)
        with pytest.raises(ValueError, match="sample count"):
            err_bias_pca(truth, 0)


class TestGammaMdOracle:
    def _truth(self, sigma=1.0):
        return GroundTruthMD(u=np.eye(3)[:, :1], lam=np.array([4.0]),
                             sigma=sigma)

    def test_diagonal_case_both_methods(self):
        noise = np.diag([0.0, 1.0, -1.0])
        truth = self._truth()
        for method in ("eigen", "resolvent"):
            got = gamma_md_oracle(5.0, truth, noise, method=method)
            assert got == pytest.approx(5.0 / 12.0, rel=1e-12)

    def test_zero_noise_reduces_to_count_over_shift(self):
        got = gamma_md_oracle(5.0, self._truth(sigma=2.0), np.zeros((3, 3)))
        assert got == pytest.approx(4.0 * 2.0 / 5.0, rel=1e-15)

    def test_methods_agree_on_random_input(self):
        gen = Seed(74).generator()
        u = random_orthonormal_frame(8, 2, Seed(75))
        truth = GroundTruthMD(u=u, lam=np.array([30.0, 20.0]), sigma=1.5)
        raw = gen.standard_normal((8, 8))
        noise = (raw + raw.T) / 2.0
        eig = gamma_md_oracle(50.0, truth, noise, method="eigen")
        res = gamma_md_oracle(50.0, truth, noise, method="resolvent")
        assert res == pytest.approx(eig, rel=1e-10)

    def test_evaluation_on_complement_spectrum_rejected(self):
        noise = np.diag([0.0, 1.0, -1.0])
        with pytest.raises(SingularResolventError):
            gamma_md_oracle(1.0, self._truth(), noise, method="eigen")
        with pytest.raises(SingularResolventError):
            gamma_md_oracle(1.0, self._truth(), noise, method="resolvent")

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError, match="method"):
            gamma_md_oracle(5.0, self._truth(), np.zeros((3, 3)),
                            method="series")


class TestGammaPcaOracle:
    def _truth(self, n=5):
        return spiked_cov(np.eye(2)[:, :1], np.array([10.0]), 1.0, n=n)

    def test_projected_gram_case_both_methods(self):
        x = np.array([[3.0, 1.0, 4.0, 1.0, 5.0],
                      [1.0, 2.0, 0.0, 0.0, 0.0]])
        for method in ("eigen", "resolvent"):
            got = gamma_pca_oracle(11.0, self._truth(), x, method=method)
            assert got == pytest.approx(0.02, rel=1e-12)

    def test_zero_data_gives_zero(self):
        assert gamma_pca_oracle(11.0, self._truth(), np.zeros((2, 5))) == 0.0

    def test_requires_sample_count(self):
        truth = spiked_cov(np.eye(2)[:, :1], np.array([10.0]), 1.0)
        with pytest.raises(ValueError, match="sample count"):
            gamma_pca_oracle(11.0, truth, np.zeros((2, 5)))

    def test_methods_agree_on_random_input(self):
        n, p = 40, 6
        u = random_orthonormal_frame(p, 2, Seed(76))
        truth = spiked_cov(u, np.array([25.0, 12.0]), 1.0, n=n)
        x = pca_sample(truth, n, Seed(77))
        eig = gamma_pca_oracle(30.0, truth, x, method="eigen")
        res = gamma_pca_oracle(30.0, truth, x, method="resolvent")
        assert res == pytest.approx(eig, rel=1e-10)
