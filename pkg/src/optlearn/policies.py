"""Measurement policies for ranking and selection.

Every policy is a pure decision rule ``decide(config, state, rng) -> arm``.
The knowledge-gradient scores live here too, for independent beliefs
(closed form) and correlated beliefs (exact expectation of a maximum of
affine functions of one standard normal).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .belief import (
    Belief,
    CorrelatedBelief,
    IndependentBelief,
    kg_f_factor,
    norm_cdf,
    norm_pdf,
    predictive_sd_vector,
    update,
)
from .errors import ConfigError, UsageError

# Tuned values reported for AUF with correlated priors at N=400.
DEFAULT_Z_ALPHA = 0.969
DEFAULT_UCBE_ALPHA = 6.657


class PolicyKind(str, Enum):
    KG = "kg"
    KGCB = "kgcb"
    IE = "ie"
    UCBE = "ucbe"
    SR = "sr"
    KRIGING = "kriging"
    EXPL = "expl"
    EXPT = "expt"


class TieBreak(str, Enum):
    LOWEST_INDEX = "lowest_index"
    RANDOM = "random"


# Policies driven by frequentist sample means; each arm is measured once first.
NEEDS_INITIALIZATION = frozenset({PolicyKind.UCBE, PolicyKind.SR, PolicyKind.EXPT})


@dataclass(frozen=True)
class PolicyConfig:
    """Which decision rule to run and its parameters.

    ``z_alpha`` must be set for IE and only IE, ``alpha`` for UCB-E and only
    UCB-E.  ``randomized`` switches EXPL from round robin to a uniformly
    random choice among the least-measured arms.
    """

    kind: PolicyKind
    z_alpha: Optional[float] = None
    alpha: Optional[float] = None
    tie_break: TieBreak = TieBreak.LOWEST_INDEX
    randomized: bool = False

    def __post_init__(self):
        try:
            kind = PolicyKind(self.kind)
            tie = TieBreak(self.tie_break)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "tie_break", tie)
        if (self.z_alpha is not None) != (kind is PolicyKind.IE):
            raise ConfigError("z_alpha is required for 'ie' and not accepted otherwise")
        if (self.alpha is not None) != (kind is PolicyKind.UCBE):
            raise ConfigError("alpha is required for 'ucbe' and not accepted otherwise")
        if self.alpha is not None and not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        if self.randomized and kind is not PolicyKind.EXPL:
            raise ConfigError("randomized is only meaningful for 'expl'")

    @classmethod
    def make(cls, kind, **params):
        """Build a config, filling the documented defaults for IE and UCB-E."""
        kind = PolicyKind(kind)
        if kind is PolicyKind.IE:
            params.setdefault("z_alpha", DEFAULT_Z_ALPHA)
        if kind is PolicyKind.UCBE:
            params.setdefault("alpha", DEFAULT_UCBE_ALPHA)
        return cls(kind, **params)

    @property
    def label(self):
        if self.kind is PolicyKind.IE:
            return f"ie(z={self.z_alpha:g})"
        if self.kind is PolicyKind.UCBE:
            return f"ucbe(a={self.alpha:g})"
        return self.kind.value


@dataclass
class PolicyState:
    """Everything a decision rule may look at.

    ``counts`` and ``sums`` hold every measurement including the
    initialization pass, so ``counts.sum() == step`` always holds;
    ``init_rounds`` records how many of those steps were the pass.
    ``sr_active`` and ``sr_phase`` are the successive-rejects cursor.
    """

    belief: Belief
    budget: int
    counts: np.ndarray = None
    sums: np.ndarray = None
    step: int = 0
    init_rounds: int = 0
    sr_active: list = field(default_factory=list)
    sr_phase: int = 1

    def __post_init__(self):
        m = self.belief.n_arms
        if self.budget < 1:
            raise UsageError(f"budget must be >= 1, got {self.budget}")
        if self.counts is None:
            self.counts = np.zeros(m, dtype=int)
        if self.sums is None:
            self.sums = np.zeros(m)
        if not self.sr_active:
            self.sr_active = list(range(m))

    @property
    def n_arms(self):
        return self.belief.n_arms

    @property
    def sample_means(self):
        out = np.full(self.n_arms, np.nan)
        seen = self.counts > 0
        out[seen] = self.sums[seen] / self.counts[seen]
        return out

    def record(self, arm, observation, initialization=False):
        """Fold one measurement into the belief and the frequentist tallies."""
        self.belief = update(self.belief, arm, observation)
        self.counts[arm] += 1
        self.sums[arm] += observation
        self.step += 1
        if initialization:
            self.init_rounds += 1


# ---------------------------------------------------------------------------
# Knowledge gradient
# ---------------------------------------------------------------------------


def _kg_sigma_tilde(precisions, noise_precision):
    return np.sqrt(1.0 / precisions - 1.0 / (precisions + noise_precision))


def kg_scores_independent(belief: IndependentBelief) -> np.ndarray:
    """Knowledge-gradient score of every arm under independent beliefs."""
    means = belief.means
    if means.size < 2:
        raise UsageError("knowledge gradient needs at least two arms")
    order = np.argsort(-means, kind="stable")
    best, second = means[order[0]], means[order[1]]
    best_other = np.full(means.size, best)
    best_other[order[0]] = second
    sigma = _kg_sigma_tilde(belief.precisions, belief.noise_precision)
    with np.errstate(divide="ignore", invalid="ignore"):
        zeta = -np.abs(means - best_other) / sigma
    scores = sigma * kg_f_factor(zeta)
    return np.where(sigma > 0, scores, 0.0)


def kg_score_independent(belief: IndependentBelief, arm: int) -> float:
    if not 0 <= arm < belief.n_arms:
        raise UsageError(f"arm {arm} out of range [0, {belief.n_arms})")
    return float(kg_scores_independent(belief)[arm])


def expected_max_affine(a, b) -> float:
    """Exact ``E[max_i(a_i + b_i Z)] - max_i a_i`` for ``Z ~ N(0, 1)``.

    Lines are sorted by slope, dominated ones are dropped while building the
    upper envelope, and the expectation is accumulated over the envelope's
    breakpoints ``c_j`` as ``sum (b_{j+1} - b_j) f(-|c_j|)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    order = np.lexsort((a, b))
    a, b = a[order], b[order]
    # Equal slopes: only the highest intercept can be on the envelope.
    keep = np.ones(a.size, dtype=bool)
    keep[:-1] = b[1:] != b[:-1]
    a, b = a[keep], b[keep]
    if a.size == 1:
        return 0.0

    env = [0]
    cuts = [-math.inf]
    with np.errstate(over="ignore", divide="ignore"):
        for j in range(1, a.size):
            while env:
                k = env[-1]
                c = (a[k] - a[j]) / (b[j] - b[k])
                if c > cuts[-1]:
                    break
                env.pop()
                cuts.pop()
            if not env:
                # line j dominates everything kept so far
                env, cuts = [j], [-math.inf]
                continue
            env.append(j)
            cuts.append(c)

    if len(env) == 1:
        return 0.0
    env = np.asarray(env)
    slopes = np.diff(b[env])
    c = np.asarray(cuts[1:])
    return float(np.sum(slopes * kg_f_factor(-np.abs(c))))


def kg_score_correlated(belief: CorrelatedBelief, arm: int) -> float:
    """Knowledge-gradient score of ``arm`` under a correlated belief."""
    if belief.n_arms < 2:
        raise UsageError("knowledge gradient needs at least two arms")
    b = predictive_sd_vector(belief, arm)
    return expected_max_affine(belief.means, b)


def kg_scores_correlated(belief: CorrelatedBelief) -> np.ndarray:
    return np.array([kg_score_correlated(belief, x) for x in range(belief.n_arms)])


def kg_scores(belief: Belief) -> np.ndarray:
    if isinstance(belief, CorrelatedBelief):
        return kg_scores_correlated(belief)
    return kg_scores_independent(belief)


# ---------------------------------------------------------------------------
# Competing score rules
# ---------------------------------------------------------------------------


def interval_estimation_scores(belief: Belief, z_alpha: float) -> np.ndarray:
    return belief.means + z_alpha * belief.sds


def ucbe_scores(sample_means, counts, alpha: float) -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    return np.asarray(sample_means, dtype=float) + np.sqrt(alpha / counts)


def kriging_scores(belief: Belief) -> np.ndarray:
    """Expected improvement over the arm with the largest ``theta + sigma``."""
    theta = belief.means
    sigma = belief.sds
    ref = int(np.argmax(theta + sigma))
    diff = theta - theta[ref]
    out = np.maximum(diff, 0.0)
    pos = sigma > 0
    u = diff[pos] / sigma[pos]
    out[pos] = diff[pos] * norm_cdf(u) + sigma[pos] * norm_pdf(u)
    return out


def _argmax(scores, tie_break, rng):
    scores = np.asarray(scores, dtype=float)
    ties = np.flatnonzero(scores == np.max(scores))
    if tie_break is TieBreak.RANDOM and ties.size > 1:
        return int(rng.choice(ties))
    return int(ties[0])


def _argmin(values, tie_break, rng):
    return _argmax(-np.asarray(values, dtype=float), tie_break, rng)


# ---------------------------------------------------------------------------
# Successive rejects
# ---------------------------------------------------------------------------


def _log_bar(m):
    return 0.5 + sum(1.0 / i for i in range(2, m + 1))


@dataclass(frozen=True)
class SRSchedule:
    """Successive-rejects phase plan.

    ``cumulative[m-1]`` is how many times every survivor of phase ``m`` has
    been measured by the end of that phase, ``increments`` the per-arm
    additions in each phase and ``arms_per_phase`` the survivors measured.
    At the end of each phase the surviving arm with the lowest sample mean
    is dropped.
    """

    n_arms: int
    budget: int
    cumulative: tuple
    increments: tuple
    arms_per_phase: tuple

    @property
    def total(self):
        return sum(k * d for k, d in zip(self.arms_per_phase, self.increments))

    @property
    def n_phases(self):
        return len(self.increments)


def sr_schedule(n_arms: int, budget: int) -> SRSchedule:
    if n_arms < 2:
        raise UsageError("successive rejects needs at least two arms")
    if budget < n_arms:
        raise UsageError(f"budget {budget} is smaller than the number of arms {n_arms}")
    lb = _log_bar(n_arms)
    cumulative = []
    for m in range(1, n_arms):
        n_m = math.ceil((budget - n_arms) / (lb * (n_arms + 1 - m)))
        # The initialization pass already gives every arm one sample.
        cumulative.append(max(n_m, 1))
    increments = np.diff([0] + cumulative)
    arms = [n_arms + 1 - m for m in range(1, n_arms)]
    return SRSchedule(n_arms, budget, tuple(cumulative), tuple(int(d) for d in increments), tuple(arms))


def _sr_decide(config, state, rng):
    schedule = sr_schedule(state.n_arms, state.budget)
    means = state.sample_means
    while state.sr_phase <= schedule.n_phases:
        target = schedule.cumulative[state.sr_phase - 1]
        active = state.sr_active
        pending = [x for x in active if state.counts[x] < target]
        if pending:
            return min(pending, key=lambda x: (state.counts[x], x))
        loser = active[_argmin(means[active], config.tie_break, rng)]
        state.sr_active = [x for x in active if x != loser]
        state.sr_phase += 1
    return state.sr_active[0]


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def decide(config: PolicyConfig, state: PolicyState, rng=None) -> int:
    """Return the next arm to measure.

    Policies that rank arms by sample means first measure every arm once,
    in index order; those steps count against the budget.
    """
    kind = config.kind
    tie = config.tie_break
    if kind in NEEDS_INITIALIZATION:
        unseen = np.flatnonzero(state.counts == 0)
        if unseen.size:
            return int(unseen[0])

    if kind is PolicyKind.KG:
        return _argmax(kg_scores(state.belief), tie, rng)
    if kind is PolicyKind.KGCB:
        belief = state.belief
        if isinstance(belief, IndependentBelief):
            belief = belief.to_correlated()
        return _argmax(kg_scores_correlated(belief), tie, rng)
    if kind is PolicyKind.IE:
        return _argmax(interval_estimation_scores(state.belief, config.z_alpha), tie, rng)
    if kind is PolicyKind.KRIGING:
        return _argmax(kriging_scores(state.belief), tie, rng)
    if kind is PolicyKind.UCBE:
        return _argmax(ucbe_scores(state.sample_means, state.counts, config.alpha), tie, rng)
    if kind is PolicyKind.EXPT:
        return _argmax(state.sample_means, tie, rng)
    if kind is PolicyKind.EXPL:
        if config.randomized:
            least = np.flatnonzero(state.counts == state.counts.min())
            return int(rng.choice(least))
        return state.step % state.n_arms
    if kind is PolicyKind.SR:
        return _sr_decide(config, state, rng)
    raise UsageError(f"unknown policy kind {kind!r}")


def is_initialization_step(config: PolicyConfig, state: PolicyState) -> bool:
    return config.kind in NEEDS_INITIALIZATION and bool(np.any(state.counts == 0))
