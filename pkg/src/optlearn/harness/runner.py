"""Simulation loop: run policies against a shared observation ledger."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..belief import Belief, IndependentBelief
from ..errors import OptLearnError, UsageError
from ..policies import PolicyConfig, PolicyKind, PolicyState, decide, is_initialization_step
from .ledger import MeasurementHistory, ObservationLedger, substream

BELIEF_KINDS = ("independent", "correlated")


@dataclass(frozen=True)
class PolicySpec:
    """A policy entry of an experiment: decision rule, belief model, display name."""

    config: PolicyConfig
    belief: str = "independent"
    name: Optional[str] = None

    def __post_init__(self):
        if self.belief not in BELIEF_KINDS:
            raise UsageError(f"belief must be one of {BELIEF_KINDS}, got {self.belief!r}")
        if self.name is None:
            suffix = "" if self.belief == "independent" or self.config.kind is PolicyKind.KGCB else "+corr"
            object.__setattr__(self, "name", self.config.label + suffix)

    @classmethod
    def make(cls, kind, belief=None, name=None, **params):
        config = PolicyConfig.make(kind, **params)
        if belief is None:
            belief = "correlated" if config.kind is PolicyKind.KGCB else "independent"
        return cls(config, belief, name)


@dataclass
class PolicyRun:
    """Outcome of one policy on one sample path.

    ``recommendations[n]`` is ``argmax theta^n`` after ``n`` measurements
    (lowest index on ties), so it has ``budget + 1`` entries.
    """

    history: MeasurementHistory
    recommendations: np.ndarray
    final_belief: Belief
    init_rounds: int

    @property
    def final_recommendation(self) -> int:
        return int(self.recommendations[-1])

    @property
    def final_max_mean(self) -> float:
        return float(np.max(self.final_belief.means))


class PolicyAbort(OptLearnError, RuntimeError):
    """A policy proposed something that is not a valid arm."""


def run_policy(config: PolicyConfig, prior: Belief, budget: int, observe, rng=None,
               policy_name=None) -> PolicyRun:
    """Run one policy for ``budget`` measurements.

    Parameters
    ----------
    observe : callable ``(arm, k) -> float``
        Returns the ``k``-th observation of ``arm``; typically
        :meth:`ObservationLedger.observation`.
    """
    if budget < 0:
        raise UsageError(f"budget must be >= 0, got {budget}")
    m = prior.n_arms
    history = MeasurementHistory(m)
    recs = np.empty(budget + 1, dtype=int)
    recs[0] = int(np.argmax(prior.means))
    if budget == 0:
        return PolicyRun(history, recs, prior, 0)
    state = PolicyState(prior, budget)
    name = policy_name or config.label
    for n in range(budget):
        init = is_initialization_step(config, state)
        arm = decide(config, state, rng)
        if isinstance(arm, (bool, np.bool_)) or not isinstance(arm, (int, np.integer)) or not 0 <= arm < m:
            raise PolicyAbort(f"policy {name!r} returned invalid arm {arm!r} at step {n}")
        arm = int(arm)
        w = observe(arm, history.occurrences(arm))
        history.append(arm, w)
        state.record(arm, w, initialization=init)
        recs[n + 1] = int(np.argmax(state.belief.means))
    return PolicyRun(history, recs, state.belief, state.init_rounds)


@dataclass
class ReplicationResult:
    """All policies on one truth draw."""

    replication: int
    truth: np.ndarray
    runs: dict
    hyperparams: Optional[dict] = None
    design_size: int = 0

    def opportunity_costs(self, name) -> np.ndarray:
        recs = self.runs[name].recommendations
        return float(np.max(self.truth)) - self.truth[recs]


def run_replication(problem, policies, budget, ledger: ObservationLedger, priors,
                    policy_rng=None, replication=0) -> ReplicationResult:
    """Run every policy on the same truth and the same ledger.

    Parameters
    ----------
    policies : sequence of PolicySpec
    priors : PriorBundle
        Fitted before step 0; the design measurements are not charged
        against ``budget``.
    policy_rng : callable ``index -> Generator``, optional
        Per-policy stream factory; defaults to a fixed seed per index.
    """
    names = [p.name for p in policies]
    if len(set(names)) != len(names):
        raise UsageError(f"policy names must be unique, got {names}")
    runs = {}
    for i, spec in enumerate(policies):
        rng = policy_rng(i) if policy_rng is not None else np.random.default_rng(i)
        runs[spec.name] = run_policy(spec.config, priors.for_kind(spec.belief), budget,
                                     ledger.observation, rng, spec.name)
    hyper = priors.hyperparams.to_dict() if priors.hyperparams is not None else None
    return ReplicationResult(replication, ledger.truth, runs, hyper, len(priors.design_arms))


def simulate_replication(problem, policies, budget, seed, replication,
                         policy_purpose="policy") -> ReplicationResult:
    """Draw the truth, fit priors and run all policies for one replication index."""
    truth = problem.sample_truth(substream(seed, replication, "truth"))
    ledger = ObservationLedger.for_problem(problem, truth, seed, replication)
    priors = problem.build_priors(truth, substream(seed, replication, "design"))
    return run_replication(problem, policies, budget, ledger, priors,
                           lambda i: substream(seed, replication, policy_purpose, i), replication)


def sample_path_values(config: PolicyConfig, prior: Belief, budget: int, n_paths: int, rng):
    """Per path, the true mean of the final recommendation and ``max theta^N``.

    Truths are drawn from ``prior`` itself, so both columns estimate the
    same expectation.
    """
    chosen = np.empty(n_paths)
    best_mean = np.empty(n_paths)
    for p in range(n_paths):
        mu = draw_truth(prior, rng)
        ledger = ObservationLedger.gaussian(mu, prior.noise_sd, rng)
        run = run_policy(config, prior, budget, ledger.observation, rng)
        chosen[p] = mu[run.final_recommendation]
        best_mean[p] = run.final_max_mean
    return chosen, best_mean


def draw_truth(prior: Belief, rng, size=None) -> np.ndarray:
    """Sample true means from a belief."""
    shape = () if size is None else (size,)
    if isinstance(prior, IndependentBelief):
        z = rng.standard_normal(shape + (prior.n_arms,))
        return prior.means + prior.sds * z
    vals, vecs = np.linalg.eigh(prior.covariance)
    root = vecs * np.sqrt(np.clip(vals, 0.0, None))
    z = rng.standard_normal(shape + (prior.n_arms,))
    return prior.means + z @ root.T
