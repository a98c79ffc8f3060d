"""Benchmark problem classes: equal-prior, AUF (newsvendor) and Goldstein-Price.

A :class:`Problem` bundles the alternatives, a truth sampler, the noisy
observation model and a prior builder.  All problems are maximization
problems.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..belief import CorrelatedBelief, IndependentBelief, norm_cdf, norm_pdf, update_independent
from ..errors import UsageError
from .design import default_design_size, latin_hypercube_design
from .mle import KernelHyperparams, fit_mle_prior

EQUAL_PRIOR_ARMS = 100
EQUAL_PRIOR_TRUTH_RANGE = (0.0, 60.0)
EQUAL_PRIOR_NOISE_SD = 100.0
EQUAL_PRIOR_MEAN = 30.0
EQUAL_PRIOR_SD = 10.0

AUF_ARMS = np.arange(21, 121)
AUF_DEMAND_MEAN = 60.0
AUF_DEMAND_SD = 18.0
# Draws used to calibrate the AUF belief-model noise level.
AUF_NOISE_CALIBRATION_DRAWS = 10_000

GOLDSTEIN_POINTS = 13
GOLDSTEIN_BOUNDS = (-3.0, 3.0)


@dataclass(frozen=True)
class PriorBundle:
    """Priors for one replication plus the design data that produced them."""

    independent: IndependentBelief
    correlated: CorrelatedBelief
    hyperparams: Optional[KernelHyperparams] = None
    design_arms: tuple = ()
    design_observations: tuple = ()

    def for_kind(self, kind):
        return self.correlated if kind == "correlated" else self.independent


@dataclass(frozen=True, eq=False)
class Problem:
    name: str
    arm_coordinates: np.ndarray
    noise_sd: float
    truth_sampler: Callable
    observation_sampler: Callable
    prior_builder: Callable
    prior_mean: Optional[float] = None
    prior_sd: Optional[float] = None
    fixed_truth: bool = False
    ratio_enabled: bool = True
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        coords = np.asarray(self.arm_coordinates, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        object.__setattr__(self, "arm_coordinates", coords)
        if coords.shape[0] < 2:
            raise UsageError("a problem needs at least two arms")
        if not self.noise_sd > 0:
            raise UsageError(f"noise_sd must be > 0, got {self.noise_sd}")

    @property
    def n_arms(self):
        return self.arm_coordinates.shape[0]

    def sample_truth(self, rng):
        mu = np.asarray(self.truth_sampler(rng), dtype=float)
        if mu.shape != (self.n_arms,) or not np.all(np.isfinite(mu)):
            raise UsageError(f"{self.name}: truth sampler returned an invalid vector")
        return mu

    def observe(self, arm, truth, rng):
        return float(self.observation_sampler(int(arm), truth, rng))

    def build_priors(self, truth, rng) -> PriorBundle:
        return self.prior_builder(self, truth, rng)

    def metadata(self):
        return {"name": self.name, "n_arms": self.n_arms, "noise_sd": self.noise_sd, **self.params}


def _gaussian_observation(problem_noise_sd):
    def sample(arm, truth, rng):
        return truth[arm] + problem_noise_sd * rng.standard_normal()
    return sample


def constant_prior_builder(problem, truth, rng):
    independent = IndependentBelief.from_sd(
        np.full(problem.n_arms, problem.prior_mean), problem.prior_sd, problem.noise_sd
    )
    return PriorBundle(independent, independent.to_correlated())


def _snap_to_arms(points, coords):
    width = np.ptp(coords, axis=0)
    width[width <= 0] = 1.0
    d2 = (((points[:, None, :] - coords[None, :, :]) / width) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def design_prior_builder(problem, truth, rng):
    """Latin-hypercube design, replicates at the best responses, MLE fit.

    The correlated prior is the fitted squared-exponential model conditioned
    on every design observation.  The independent prior uses the configured
    constants, or the design mean and spread when none are configured, and
    is conditioned on the same observations.
    """
    coords = problem.arm_coordinates
    d = coords.shape[1]
    n_params = d + 2  # scale, one rate per dimension, noise variance
    bounds = np.column_stack([coords.min(axis=0), coords.max(axis=0)])
    points = latin_hypercube_design(d, default_design_size(n_params), bounds, rng)
    arms = list(_snap_to_arms(points, coords))
    obs = [problem.observe(a, truth, rng) for a in arms]

    best_first = []
    for i in np.argsort(obs, kind="stable")[::-1]:
        if arms[i] not in best_first:
            best_first.append(arms[i])
        if len(best_first) == n_params:
            break
    for a in best_first:
        arms.append(a)
        obs.append(problem.observe(a, truth, rng))

    hyper, correlated = fit_mle_prior(coords[arms], obs, arm_coordinates=coords, design_arms=arms)

    mean = problem.prior_mean if problem.prior_mean is not None else float(np.mean(obs))
    sd = problem.prior_sd if problem.prior_sd is not None else float(np.std(obs, ddof=1))
    if not sd > 0:
        sd = 1.0
    independent = IndependentBelief.from_sd(np.full(problem.n_arms, mean), sd, problem.noise_sd)
    for a, w in zip(arms, obs):
        independent = update_independent(independent, int(a), w)
    return PriorBundle(independent, correlated, hyper, tuple(int(a) for a in arms), tuple(obs))


# ---------------------------------------------------------------------------
# Equal prior
# ---------------------------------------------------------------------------


def make_equal_prior(n_arms=EQUAL_PRIOR_ARMS) -> Problem:
    """Truths i.i.d. uniform on [0, 60], noise sd 100, prior N(30, 10^2) per arm."""
    low, high = EQUAL_PRIOR_TRUTH_RANGE

    def truth(rng):
        return rng.uniform(low, high, size=n_arms)

    return Problem(
        name="equal_prior",
        arm_coordinates=np.arange(n_arms, dtype=float),
        noise_sd=EQUAL_PRIOR_NOISE_SD,
        truth_sampler=truth,
        observation_sampler=_gaussian_observation(EQUAL_PRIOR_NOISE_SD),
        prior_builder=constant_prior_builder,
        prior_mean=EQUAL_PRIOR_MEAN,
        prior_sd=EQUAL_PRIOR_SD,
        params={"truth_range": list(EQUAL_PRIOR_TRUTH_RANGE)},
    )


# ---------------------------------------------------------------------------
# Asymmetric unimodular function
# ---------------------------------------------------------------------------


def auf_true_means(theta1, theta2, x=AUF_ARMS):
    """``E[theta1 * min(x, xi) - theta2 * x]`` for ``xi ~ N(60, 18^2)``."""
    x = np.asarray(x, dtype=float)
    u = (x - AUF_DEMAND_MEAN) / AUF_DEMAND_SD
    expected_min = x - (x - AUF_DEMAND_MEAN) * norm_cdf(u) - AUF_DEMAND_SD * norm_pdf(u)
    return theta1 * expected_min - theta2 * x


def auf_observation(theta1, theta2, x, rng):
    xi = AUF_DEMAND_MEAN + AUF_DEMAND_SD * rng.standard_normal()
    return theta1 * min(x, xi) - theta2 * x


def make_auf(theta1=1.0, ratio=0.5, rng=None, prior_mean=None, prior_sd=None) -> Problem:
    """Newsvendor-style benchmark over the order quantities 21..120.

    The demand ``xi`` is drawn fresh for every measurement and is the only
    source of noise.  The belief-model noise level is the sample sd of the
    reward at the middle of the arm range, since the constant prior mean
    gives no preferred arm.
    """
    if not theta1 > 0:
        raise UsageError(f"theta1 must be > 0, got {theta1}")
    if not 0 < ratio < 1:
        raise UsageError(f"ratio must lie in (0, 1), got {ratio}")
    theta2 = ratio * theta1
    rng = np.random.default_rng(0 if rng is None else rng)
    mu = auf_true_means(theta1, theta2)
    x_ref = float(np.median(AUF_ARMS))
    xi = AUF_DEMAND_MEAN + AUF_DEMAND_SD * rng.standard_normal(AUF_NOISE_CALIBRATION_DRAWS)
    noise_sd = float(np.std(theta1 * np.minimum(x_ref, xi) - theta2 * x_ref, ddof=1))

    def truth(_rng):
        return mu.copy()

    def observe(arm, _truth, rng):
        return auf_observation(theta1, theta2, float(AUF_ARMS[arm]), rng)

    return Problem(
        name="auf",
        arm_coordinates=AUF_ARMS.astype(float),
        noise_sd=noise_sd,
        truth_sampler=truth,
        observation_sampler=observe,
        prior_builder=design_prior_builder,
        prior_mean=prior_mean,
        prior_sd=prior_sd,
        fixed_truth=True,
        params={"theta1": theta1, "theta2": theta2, "ratio": ratio, "noise_reference_arm": x_ref},
    )


# ---------------------------------------------------------------------------
# Goldstein-Price
# ---------------------------------------------------------------------------


def goldstein_price(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = 1 + (x + y + 1) ** 2 * (19 - 14 * x + 3 * x**2 - 14 * y + 6 * x * y + 3 * y**2)
    b = 30 + (2 * x - 3 * y) ** 2 * (18 - 32 * x + 12 * x**2 + 48 * y - 36 * x * y + 27 * y**2)
    return a * b


def goldstein_grid(n=GOLDSTEIN_POINTS, bounds=GOLDSTEIN_BOUNDS):
    axis = np.linspace(bounds[0], bounds[1], n)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


def make_goldstein(noise_sd, prior_mean=None, prior_sd=None) -> Problem:
    """Goldstein-Price on a 13x13 grid over [-3, 3]^2, rewards negated.

    The truth is fixed; each observation adds ``N(0, noise_sd^2)`` noise.
    Opportunity-cost ratios are disabled because every reward is negative.
    """
    if noise_sd is None or not noise_sd > 0:
        raise UsageError("goldstein needs an explicit noise_sd > 0")
    coords = goldstein_grid()
    mu = -goldstein_price(coords[:, 0], coords[:, 1])

    def truth(_rng):
        return mu.copy()

    return Problem(
        name="goldstein",
        arm_coordinates=coords,
        noise_sd=float(noise_sd),
        truth_sampler=truth,
        observation_sampler=_gaussian_observation(float(noise_sd)),
        prior_builder=design_prior_builder,
        prior_mean=prior_mean,
        prior_sd=prior_sd,
        fixed_truth=True,
        ratio_enabled=False,
        params={"grid_points": GOLDSTEIN_POINTS, "bounds": list(GOLDSTEIN_BOUNDS)},
    )


def make_problem(name, **params) -> Problem:
    """Build a problem from its config name and parameters."""
    builders = {"equal_prior": make_equal_prior, "auf": make_auf, "goldstein": make_goldstein}
    if name not in builders:
        raise UsageError(f"unknown problem {name!r}; expected one of {sorted(builders)}")
    return builders[name](**params)
