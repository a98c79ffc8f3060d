import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from conftest import random_spd
from helpers import explicit_correlated_update, f_factor_reference
from optlearn.belief import (
    CorrelatedBelief,
    IndependentBelief,
    belief_from_dict,
    kg_f_factor,
    norm_cdf,
    norm_pdf,
    predictive_sd_vector,
    update,
    update_correlated,
    update_independent,
)
from optlearn.errors import InputError, NumericalDegeneracyError, UsageError


class TestGaussianHelpers:
    def test_pdf_cdf_match_scipy(self):
        a = np.linspace(-8, 8, 101)
        np.testing.assert_allclose(norm_pdf(a), stats.norm.pdf(a), rtol=1e-14)
        np.testing.assert_allclose(norm_cdf(a), stats.norm.cdf(a), rtol=1e-14)

    def test_f_at_zero_and_one(self):
        # f(0) = phi(0); f(1) = Phi(1) + phi(1)
        assert kg_f_factor(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)
        assert kg_f_factor(1.0) == pytest.approx(1.0833154705876864, rel=1e-14)

    def test_f_matches_reference_on_moderate_range(self):
        a = np.linspace(-6, 6, 241)
        np.testing.assert_allclose(kg_f_factor(a), f_factor_reference(a), rtol=1e-10, atol=1e-15)

    def test_f_tail_is_positive_and_accurate(self):
        # Asymptotically f(-t) ~ phi(t) / t^2 for large t.
        t = np.array([10.0, 20.0, 35.0])
        got = kg_f_factor(-t)
        approx = stats.norm.pdf(t) / t**2 * (1 - 3 / t**2)
        assert np.all(got > 0)
        np.testing.assert_allclose(got, approx, rtol=2e-2)

    def test_f_limits(self):
        assert kg_f_factor(-np.inf) == 0.0
        assert kg_f_factor(-1e6) == 0.0

    @given(st.floats(-30, 30), st.floats(-30, 30))
    def test_f_increasing_and_above_positive_part(self, x, y):
        lo, hi = sorted((x, y))
        assert kg_f_factor(lo) <= kg_f_factor(hi) + 1e-15
        assert kg_f_factor(x) >= max(x, 0.0) - 1e-12

    def test_scalar_in_scalar_out(self):
        assert isinstance(kg_f_factor(0.3), float)
        assert kg_f_factor(np.array([0.3])).shape == (1,)


class TestBeliefTypes:
    def test_independent_validation(self):
        with pytest.raises(InputError):
            IndependentBelief([0, 0], [1, 0], 1.0)
        with pytest.raises(InputError):
            IndependentBelief([0, 0], [1], 1.0)
        with pytest.raises(InputError):
            IndependentBelief([0, 0], [1, 1], 0.0)
        with pytest.raises(InputError):
            IndependentBelief([0, np.nan], [1, 1], 1.0)

    def test_arrays_are_read_only(self):
        b = IndependentBelief([0, 1], [1, 1], 1.0)
        with pytest.raises(ValueError):
            b.means[0] = 3.0

    def test_correlated_validation(self):
        with pytest.raises(InputError):
            CorrelatedBelief([0, 0], [[1, 0.5], [0.4, 1]], 1.0)
        with pytest.raises(InputError):
            CorrelatedBelief([0, 0], [[1, 2], [2, 1]], 1.0)
        # A singular PSD covariance is allowed.
        CorrelatedBelief([0, 0], [[1, 1], [1, 1]], 1.0)

    def test_from_sd_and_views(self):
        b = IndependentBelief.from_sd([30, 30], 10.0, 100.0)
        np.testing.assert_allclose(b.precisions, [0.01, 0.01])
        assert b.noise_precision == pytest.approx(1e-4)
        assert b.noise_sd == pytest.approx(100.0)
        np.testing.assert_allclose(b.to_correlated().covariance, np.diag([100.0, 100.0]))

    def test_dict_round_trip(self):
        b = CorrelatedBelief([1.0, 2.0], [[2.0, 0.3], [0.3, 1.0]], 0.5)
        back = belief_from_dict(b.to_dict())
        np.testing.assert_array_equal(back.covariance, b.covariance)
        ind = IndependentBelief([1.0, 2.0], [0.5, 2.0], 3.0)
        back = belief_from_dict(ind.to_dict())
        assert isinstance(back, IndependentBelief)
        np.testing.assert_array_equal(back.precisions, ind.precisions)


class TestIndependentUpdate:
    def test_precision_weighted_average(self):
        b = IndependentBelief([0.0, 5.0], [2.0, 1.0], 3.0)
        post = update_independent(b, 0, 1.0)
        assert post.means[0] == pytest.approx((2 * 0 + 3 * 1) / 5)
        assert post.precisions[0] == pytest.approx(5.0)
        assert post.means[1] == 5.0 and post.precisions[1] == 1.0

    def test_matches_diagonal_correlated_update(self, rng):
        for _ in range(50):
            m = rng.integers(2, 8)
            b = IndependentBelief(rng.normal(size=m), rng.uniform(0.1, 5, m), rng.uniform(0.1, 5))
            arm = int(rng.integers(m))
            w = float(rng.normal(scale=3))
            a = update_independent(b, arm, w)
            c = update_correlated(b.to_correlated(), arm, w)
            np.testing.assert_allclose(c.means, a.means, rtol=1e-12, atol=1e-14)
            np.testing.assert_allclose(np.diag(c.covariance), a.variances, rtol=1e-12)

    def test_bad_inputs(self):
        b = IndependentBelief([0.0, 0.0], [1.0, 1.0], 1.0)
        with pytest.raises(UsageError):
            update(b, 2, 0.0)
        with pytest.raises(UsageError):
            update(b, 1.0, 0.0)
        with pytest.raises(InputError):
            update(b, 0, np.inf)


class TestCorrelatedUpdate:
    def test_matches_information_form(self, rng):
        for _ in range(200):
            m = int(rng.integers(2, 21))
            cov = random_spd(rng, m, jitter=0.1)
            means = rng.normal(size=m)
            beta_w = float(rng.uniform(0.2, 5.0))
            arm = int(rng.integers(m))
            w = float(rng.normal(scale=2))
            post = update_correlated(CorrelatedBelief(means, cov, beta_w), arm, w)
            ref_mean, ref_cov = explicit_correlated_update(means, cov, beta_w, arm, w)
            np.testing.assert_allclose(post.means, ref_mean, atol=1e-10, rtol=0)
            np.testing.assert_allclose(post.covariance, ref_cov, atol=1e-10, rtol=0)

    def test_symmetric_and_psd_after_many_updates(self, rng):
        m = 12
        b = CorrelatedBelief(np.zeros(m), random_spd(rng, m), 4.0)
        for _ in range(300):
            b = update_correlated(b, int(rng.integers(m)), float(rng.normal()))
        np.testing.assert_array_equal(b.covariance, b.covariance.T)
        assert np.linalg.eigvalsh(b.covariance)[0] > -1e-10

    def test_singular_prior_is_updatable(self):
        b = CorrelatedBelief([0.0, 0.0], [[1.0, 1.0], [1.0, 1.0]], 1.0)
        post = update_correlated(b, 0, 2.0)
        # perfectly correlated arms move together
        assert post.means[0] == pytest.approx(1.0)
        assert post.means[1] == pytest.approx(1.0)

    def test_degenerate_predictive_variance(self):
        b = CorrelatedBelief([0.0, 0.0], np.diag([1.0, 1.0]), 1e300, validate=False)
        bad = CorrelatedBelief([0.0, 0.0], np.array([[-1e-300, 0], [0, 1]]), 1e300, validate=False)
        update_correlated(b, 0, 0.0)
        with pytest.raises(NumericalDegeneracyError):
            update_correlated(bad, 0, 0.0)

    def test_predictive_sd_vector(self, rng):
        cov = random_spd(rng, 5)
        b = CorrelatedBelief(np.zeros(5), cov, 2.0)
        vec = predictive_sd_vector(b, 3)
        np.testing.assert_allclose(vec, cov[:, 3] / np.sqrt(0.5 + cov[3, 3]))
        # mean shift after observing w is vec * (w - theta_x) / sqrt(denom)
        post = update_correlated(b, 3, 1.7)
        np.testing.assert_allclose(post.means, vec * 1.7 / np.sqrt(0.5 + cov[3, 3]), atol=1e-12)

    def test_order_independence(self, rng):
        m = 8
        b = CorrelatedBelief(rng.normal(size=m), random_spd(rng, m), 1.5)
        obs = [(int(rng.integers(m)), float(rng.normal())) for _ in range(25)]
        fwd = b
        for a, w in obs:
            fwd = update(fwd, a, w)
        rev = b
        for a, w in obs[::-1]:
            rev = update(rev, a, w)
        np.testing.assert_allclose(fwd.means, rev.means, atol=1e-8)
        np.testing.assert_allclose(fwd.covariance, rev.covariance, atol=1e-8)

    def test_posterior_mean_martingale(self, rng):
        # E[theta^{n+1} | S^n] = theta^n when W is drawn from the predictive law.
        m = 4
        cov = random_spd(rng, m)
        b = CorrelatedBelief(rng.normal(size=m), cov, 2.0)
        arm = 1
        n = 4000
        sd = math.sqrt(cov[arm, arm] + 0.5)
        draws = np.array([update(b, arm, b.means[arm] + sd * rng.standard_normal()).means for _ in range(n)])
        se = draws.std(axis=0, ddof=1) / math.sqrt(n)
        assert np.all(np.abs(draws.mean(axis=0) - b.means) <= 4 * se + 1e-12)
