import math

import numpy as np
import pytest
from scipy import integrate, stats

from optlearn.belief import CorrelatedBelief
from optlearn.errors import FittingError, UsageError
from optlearn.problems import (
    auf_observation,
    auf_true_means,
    default_design_size,
    fit_hyperparams,
    fit_mle_prior,
    goldstein_grid,
    goldstein_price,
    latin_hypercube_design,
    loo_residuals,
    make_auf,
    make_equal_prior,
    make_goldstein,
    make_problem,
    se_covariance,
)
from optlearn.problems.mle import KernelHyperparams, prior_covariance


def goldstein_transcribed(x, y):
    """Second transcription of the Goldstein-Price polynomial, expanded term by term."""
    s = x + y + 1
    t1 = 19 - 14 * x + 3 * x * x - 14 * y + 6 * x * y + 3 * y * y
    u = 2 * x - 3 * y
    t2 = 18 - 32 * x + 12 * x * x + 48 * y - 36 * x * y + 27 * y * y
    return (1 + s * s * t1) * (30 + u * u * t2)


class TestEqualPrior:
    def test_constants(self):
        p = make_equal_prior()
        assert p.n_arms == 100
        assert p.noise_sd == 100.0
        priors = p.build_priors(None, None)
        np.testing.assert_array_equal(priors.independent.means, np.full(100, 30.0))
        np.testing.assert_array_equal(priors.independent.sds, np.full(100, 10.0))
        assert priors.independent.noise_sd == pytest.approx(100.0)

    def test_truth_range_and_moments(self, rng):
        p = make_equal_prior()
        draws = np.array([p.sample_truth(rng) for _ in range(1000)])
        assert draws.min() >= 0 and draws.max() <= 60
        assert abs(draws.mean() - 30) < 0.2

    def test_prior_independent_of_truth(self, rng):
        p = make_equal_prior(10)
        a = p.build_priors(p.sample_truth(rng), rng)
        b = p.build_priors(p.sample_truth(rng), rng)
        np.testing.assert_array_equal(a.independent.means, b.independent.means)

    def test_observation_mean(self, rng):
        p = make_equal_prior(3)
        mu = np.array([10.0, 20.0, 50.0])
        w = np.array([p.observe(2, mu, rng) for _ in range(20_000)])
        assert abs(w.mean() - 50.0) <= 4 * w.std() / math.sqrt(w.size)


class TestAUF:
    def test_arms(self):
        p = make_auf(ratio=0.3)
        assert p.n_arms == 100
        np.testing.assert_array_equal(p.arm_coordinates[:, 0], np.arange(21, 121))
        assert p.fixed_truth

    def test_mean_formula_against_quadrature(self):
        for x in [21, 45, 60, 75, 99, 120]:
            for ratio in (0.2, 0.7):
                integrand = lambda xi: (min(x, xi) - ratio * x) * stats.norm.pdf(xi, 60, 18)  # noqa: E731
                q = sum(integrate.quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-12)[0]
                        for lo, hi in [(-np.inf, x), (x, np.inf)])
                assert auf_true_means(1.0, ratio, x) == pytest.approx(q, abs=1e-6)

    def test_argmax(self):
        mu = auf_true_means(1.0, 0.2)
        assert np.arange(21, 121)[np.argmax(mu)] == 75
        # newsvendor quantile
        assert 60 + 18 * stats.norm.ppf(0.8) == pytest.approx(75.15, abs=0.01)

    def test_simulated_mean(self, rng):
        vals = np.array([auf_observation(2.0, 1.0, 70.0, rng) for _ in range(100_000)])
        assert abs(vals.mean() - auf_true_means(2.0, 1.0, 70.0)) <= 3 * vals.std() / math.sqrt(vals.size)

    @pytest.mark.parametrize("ratio", [0.0, 1.0, -0.1, 1.5])
    def test_bad_ratio(self, ratio):
        with pytest.raises(UsageError):
            make_auf(ratio=ratio)

    def test_noise_calibration_deterministic(self):
        assert make_auf(ratio=0.4).noise_sd == make_auf(ratio=0.4).noise_sd
        assert 5 < make_auf(ratio=0.4).noise_sd < 18


class TestGoldstein:
    def test_grid(self):
        g = goldstein_grid()
        assert g.shape == (169, 2)
        np.testing.assert_allclose(np.unique(g[:, 0]), np.arange(-3, 3.01, 0.5))

    def test_values(self):
        assert goldstein_price(0.0, -1.0) == 3.0
        for x, y in [(1, 1), (-2.5, 0.5), (3, -3)]:
            assert goldstein_price(x, y) == pytest.approx(goldstein_transcribed(x, y), rel=1e-14)

    def test_best_arm(self):
        p = make_goldstein(noise_sd=1.0)
        mu = p.sample_truth(None)
        best = int(np.argmax(mu))
        np.testing.assert_array_equal(p.arm_coordinates[best], [0.0, -1.0])
        assert mu[best] == -3.0
        assert not p.ratio_enabled

    def test_noise_required(self):
        with pytest.raises(UsageError):
            make_goldstein(noise_sd=None)


class TestLatinHypercube:
    def test_one_point_per_bin(self, rng):
        pts = latin_hypercube_design(1, 4, [(0, 4)], rng)
        assert sorted(np.floor(pts[:, 0]).astype(int)) == [0, 1, 2, 3]
        pts = latin_hypercube_design(2, 100, rng=rng)
        for j in range(2):
            np.testing.assert_array_equal(np.sort(np.floor(pts[:, j] * 100)), np.arange(100))

    def test_marginal_uniformity(self, rng):
        stats_ = [stats.kstest(latin_hypercube_design(1, 20, rng=rng)[:, 0], "uniform").statistic
                  for _ in range(1000)]
        pooled = np.concatenate([latin_hypercube_design(2, 20, rng=rng)[:, 1] for _ in range(1000)])
        assert stats.kstest(pooled, "uniform").pvalue > 0.01
        assert max(stats_) < stats.kstwo.ppf(0.99, 20)

    def test_errors_and_default_size(self):
        with pytest.raises(UsageError):
            latin_hypercube_design(0, 5)
        with pytest.raises(UsageError):
            latin_hypercube_design(1, 0)
        assert default_design_size(3) == 30


class TestMLE:
    def test_recovers_known_kernel(self, rng):
        x = latin_hypercube_design(2, 200, [(-3, 3), (-3, 3)], rng)
        cov = se_covariance(x, x, 1.0, (0.5, 0.5)) + 0.01 * np.eye(200)
        y = 2.0 + np.linalg.cholesky(cov) @ rng.standard_normal(200)
        hyper = fit_hyperparams(x, y)
        assert abs(math.log(hyper.scale)) < 0.5
        np.testing.assert_allclose(np.log(hyper.lengthscales), np.log([0.5, 0.5]), atol=0.5)
        assert abs(math.log(hyper.noise_sd) - math.log(0.1)) < 0.5

    def test_constant_data_flagged(self):
        x = np.linspace(0, 1, 20)
        hyper = fit_hyperparams(x, np.full(20, 4.0))
        assert "constant_data" in hyper.flags
        assert "lengthscale_0_at_bound" in hyper.flags
        assert hyper.mean == pytest.approx(4.0)

    def test_loo_beats_constant_mean(self, rng):
        x = np.sort(rng.uniform(0, 10, 40))
        y = np.sin(x) + 0.05 * rng.standard_normal(40)
        hyper = fit_hyperparams(x, y)
        loo = loo_residuals(x, y, hyper)
        baseline = y - y.mean()
        assert np.mean(loo**2) < np.mean(baseline**2)

    def test_loo_matches_refit_with_fixed_hyperparams(self, rng):
        x = rng.uniform(0, 5, 12)[:, None]
        y = rng.normal(size=12)
        hyper = KernelHyperparams(1.3, (0.7,), 0.2, noise_sd=0.4)
        loo = loo_residuals(x, y, hyper)
        for i in range(12):
            keep = np.arange(12) != i
            k = se_covariance(x[keep], x[keep], 1.3, (0.7,)) + 0.16 * np.eye(11)
            kx = se_covariance(x[i:i + 1], x[keep], 1.3, (0.7,))[0]
            pred = 0.2 + kx @ np.linalg.solve(k, y[keep] - 0.2)
            assert loo[i] == pytest.approx(y[i] - pred, rel=1e-8, abs=1e-10)

    def test_fit_prior_builds_conditioned_belief(self, rng):
        arms = np.arange(21, 121, dtype=float)[:, None]
        design = [0, 10, 30, 50, 70, 99, 10, 30]
        y = np.sin(arms[design, 0] / 15) * 10 + rng.normal(size=len(design))
        hyper, belief = fit_mle_prior(arms[design], y, arm_coordinates=arms, design_arms=design)
        assert isinstance(belief, CorrelatedBelief)
        assert hyper.scale > 0 and all(v > 0 for v in hyper.lengthscales)
        # passes the belief invariants when revalidated
        CorrelatedBelief(belief.means, belief.covariance, belief.noise_precision)
        # conditioning shrank the variance at measured arms
        assert np.all(np.diag(belief.covariance)[design] < hyper.scale)

    def test_non_psd_covariance_reports_diagnostics(self, monkeypatch):
        from optlearn.problems import mle
        monkeypatch.setattr(mle, "se_covariance", lambda *a: np.array([[1.0, 2.0], [2.0, 1.0]]))
        with pytest.raises(FittingError) as err:
            prior_covariance(np.zeros((2, 1)), KernelHyperparams(1.0, (1.0,), 0.0))
        assert err.value.diagnostics["min_eigenvalue"] == pytest.approx(-1.0)


class TestDesignPriorBuilder:
    def test_auf_priors(self, rng):
        p = make_auf(ratio=0.5)
        truth = p.sample_truth(rng)
        pri = p.build_priors(truth, rng)
        # 10 * (d + 2) design points plus d + 2 replicates
        assert len(pri.design_arms) == 30 + 3
        assert pri.correlated.n_arms == 100
        assert pri.hyperparams is not None
        assert np.all(pri.independent.precisions[list(set(pri.design_arms))] > pri.independent.precisions.min())

    def test_make_problem(self):
        assert make_problem("auf", ratio=0.3).params["ratio"] == 0.3
        with pytest.raises(UsageError):
            make_problem("nope")
