"""Monte Carlo estimators of the value of information.

``v(Z) = E[max_x theta^n_x] - max_x theta^0_x`` where the expectation runs
over the prior on the truth and the noise of the measurements in ``Z``.
Only the per-arm sample sums matter, so each sample draws a truth and one
Gaussian sum per measured arm instead of every observation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..belief import Belief, IndependentBelief, update
from ..errors import InputError, UsageError
from ..harness.ledger import ObservationLedger
from ..harness.runner import draw_truth, run_policy
from ..policies import PolicyConfig

BATCH_SIZE = 20_000


@dataclass(frozen=True)
class Allocation:
    """Measurement counts per arm; the multiset ``Z``."""

    counts: tuple

    def __post_init__(self):
        arr = np.asarray(self.counts, dtype=float)
        if arr.ndim != 1 or not np.all(np.mod(arr, 1) == 0):
            raise InputError("allocation counts must be a vector of integers")
        if np.any(arr < 0):
            raise InputError("allocation counts must be >= 0")
        object.__setattr__(self, "counts", tuple(int(c) for c in arr))

    @classmethod
    def empty(cls, n_arms):
        return cls((0,) * n_arms)

    @classmethod
    def from_arms(cls, arms, n_arms):
        return cls(tuple(np.bincount(np.asarray(arms, dtype=int), minlength=n_arms)))

    @property
    def total(self):
        return sum(self.counts)

    @property
    def n_arms(self):
        return len(self.counts)

    def add(self, arm, times=1):
        c = list(self.counts)
        c[arm] += times
        return Allocation(tuple(c))

    def as_array(self):
        return np.asarray(self.counts, dtype=int)


def _as_counts(prior, allocation):
    counts = allocation.as_array() if isinstance(allocation, Allocation) else np.asarray(allocation, dtype=int)
    if counts.shape != (prior.n_arms,):
        raise InputError(f"allocation has {counts.size} entries, belief has {prior.n_arms} arms")
    if np.any(counts < 0):
        raise InputError("allocation counts must be >= 0")
    return counts


class _PosteriorMax:
    """Vectorized ``max theta^n`` given per-arm observation sums."""

    def __init__(self, prior: Belief, counts):
        self.prior = prior
        self.counts = counts
        self.noise_var = 1.0 / prior.noise_precision
        if isinstance(prior, IndependentBelief):
            self.post_precision = prior.precisions + prior.noise_precision * counts
        else:
            self.active = np.flatnonzero(counts > 0)
            a = self.active
            cov = prior.covariance
            inner = cov[np.ix_(a, a)] + np.diag(self.noise_var / counts[a])
            self.gain = np.linalg.solve(inner, cov[a, :])

    def __call__(self, sums):
        p = self.prior
        if isinstance(p, IndependentBelief):
            theta = (p.precisions * p.means + p.noise_precision * sums) / self.post_precision
        else:
            a = self.active
            ybar = sums[:, a] / self.counts[a]
            theta = p.means + (ybar - p.means[a]) @ self.gain
        return theta.max(axis=1)


def _sample_sums(truth, counts, noise_sd, rng):
    z = rng.standard_normal(truth.shape)
    return counts * truth + np.sqrt(counts) * noise_sd * z


def _voi_draws(prior: Belief, counts_list, samples, rng):
    """Paired per-sample improvements for several allocations.

    Allocations share truths and noise: the sums for a larger allocation
    extend those of a smaller one by adding independent increments, so the
    pairs are common-random-number coupled and exact in distribution.
    Returns an array of shape ``(len(counts_list), samples)``.
    """
    base = float(np.max(prior.means))
    evaluators = [_PosteriorMax(prior, c) for c in counts_list]
    order = sorted(range(len(counts_list)), key=lambda i: counts_list[i].sum())
    out = np.empty((len(counts_list), samples))
    noise_sd = prior.noise_sd
    done = 0
    while done < samples:
        n = min(BATCH_SIZE, samples - done)
        truth = draw_truth(prior, rng, n)
        sums = np.zeros_like(truth)
        have = np.zeros(prior.n_arms, dtype=int)
        for i in order:
            c = counts_list[i]
            if np.any(c < have):
                # Not nested: restart from scratch for this allocation.
                sums = np.zeros_like(truth)
                have = np.zeros(prior.n_arms, dtype=int)
            extra = c - have
            sums = sums + _sample_sums(truth, extra, noise_sd, rng)
            have = c
            if c.sum() == 0:
                out[i, done:done + n] = 0.0
            else:
                out[i, done:done + n] = evaluators[i](sums) - base
        done += n
    return out


def _mean_se(x):
    if x.size < 2:
        return float(np.mean(x)), float("nan")
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


def voi_monte_carlo(prior: Belief, allocation, samples: int, rng):
    """Estimate ``v(Z)`` and its standard error.

    Parameters
    ----------
    prior : IndependentBelief or CorrelatedBelief
    allocation : Allocation or sequence of int
    samples : int
    rng : numpy.random.Generator or seed

    Returns
    -------
    (estimate, std_error)
    """
    if samples < 1:
        raise UsageError(f"samples must be >= 1, got {samples}")
    counts = _as_counts(prior, allocation)
    if counts.sum() == 0:
        return 0.0, 0.0
    rng = np.random.default_rng(rng)
    return _mean_se(_voi_draws(prior, [counts], samples, rng)[0])


@dataclass(frozen=True)
class PairedIncrement:
    base: float
    extended: float
    difference: float
    difference_se: float


def voi_increment(prior: Belief, allocation, arm: int, samples: int, rng) -> PairedIncrement:
    """Paired estimate of ``v(Z + {arm}) - v(Z)`` on common random numbers."""
    counts = _as_counts(prior, allocation)
    if not 0 <= arm < prior.n_arms:
        raise UsageError(f"arm {arm} out of range")
    bigger = counts.copy()
    bigger[arm] += 1
    rng = np.random.default_rng(rng)
    draws = _voi_draws(prior, [counts, bigger], samples, rng)
    diff_mean, diff_se = _mean_se(draws[1] - draws[0])
    return PairedIncrement(float(draws[0].mean()), float(draws[1].mean()), diff_mean, diff_se)


def marginal_benefit_mc(belief: Belief, arm: int, samples: int, rng):
    """Conditioned estimate of the one-step benefit of measuring ``arm``.

    Draws the truth from ``belief`` (the current history), one observation,
    and records the change in ``max theta``.
    """
    counts = np.zeros(belief.n_arms, dtype=int)
    counts[arm] = 1
    return voi_monte_carlo(belief, counts, samples, rng)


def prior_value_estimate(policy: PolicyConfig, prior: Belief, budget: int, outer: int,
                         inner: int, rng):
    """Nested estimate of the prior-value of a policy.

    Each outer rollout runs the policy on a truth drawn from the prior and
    records its allocation; the value of that allocation is then estimated
    with ``inner`` fresh samples under the prior.
    """
    if outer < 1 or inner < 1:
        raise UsageError("outer and inner must be >= 1")
    if budget == 0:
        return 0.0, 0.0
    rng = np.random.default_rng(rng)
    values = np.empty(outer)
    for o in range(outer):
        mu = draw_truth(prior, rng)
        ledger = ObservationLedger.gaussian(mu, prior.noise_sd, rng)
        run = run_policy(policy, prior, budget, ledger.observation, rng)
        values[o] = voi_monte_carlo(prior, run.history.counts, inner, rng)[0]
    return _mean_se(values)


def posterior_value_estimate(policy: PolicyConfig, prior: Belief, budget: int, paths: int, rng):
    """Average realized gain ``max theta^N - max theta^0`` along policy rollouts."""
    if paths < 1:
        raise UsageError("paths must be >= 1")
    rng = np.random.default_rng(rng)
    base = float(np.max(prior.means))
    gains = np.empty(paths)
    for p in range(paths):
        mu = draw_truth(prior, rng)
        ledger = ObservationLedger.gaussian(mu, prior.noise_sd, rng)
        run = run_policy(policy, prior, budget, ledger.observation, rng)
        gains[p] = run.final_max_mean - base
    return _mean_se(gains)


def sequential_posterior(prior: Belief, arms, observations) -> Belief:
    """Belief after folding in ``(arm, observation)`` pairs in order."""
    belief = prior
    for a, w in zip(arms, observations):
        belief = update(belief, int(a), float(w))
    return belief


__all__ = [
    "Allocation",
    "PairedIncrement",
    "voi_monte_carlo",
    "voi_increment",
    "marginal_benefit_mc",
    "prior_value_estimate",
    "posterior_value_estimate",
    "sequential_posterior",
]
