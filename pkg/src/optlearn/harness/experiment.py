"""Replicated experiments, optionally threaded, and parameter tuning."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, UsageError
from ..policies import PolicyKind
from .metrics import ExperimentResult, aggregate
from .runner import PolicySpec, simulate_replication

THREADS_ENV = "OPTLEARN_THREADS"


def thread_count(requested=None) -> int:
    """Worker count: explicit value, else the environment variable, else the CPU count."""
    if requested is None:
        raw = os.environ.get(THREADS_ENV)
        if raw:
            try:
                requested = int(raw)
            except ValueError:
                raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        else:
            requested = os.cpu_count() or 1
    if requested < 1:
        raise ConfigError(f"thread count must be >= 1, got {requested}")
    return int(requested)


def run_replications(problem, policies, budget, replications, seed, threads=None,
                     policy_purpose="policy"):
    """Replication results in index order; each depends only on its own streams."""
    if budget < 1 or replications < 1:
        raise UsageError("budget and replications must both be >= 1")

    def one(r):
        return simulate_replication(problem, policies, budget, seed, r, policy_purpose)

    workers = thread_count(threads)
    if workers == 1:
        return [one(r) for r in range(replications)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(replications)))


def run_experiment(problem, policies, budget, replications, seed, threads=None) -> ExperimentResult:
    reps = run_replications(problem, policies, budget, replications, seed, threads)
    return aggregate(reps, ratio_enabled=problem.ratio_enabled)


TUNABLE = {PolicyKind.IE: "z_alpha", PolicyKind.UCBE: "alpha"}


@dataclass
class TuneResult:
    kind: PolicyKind
    parameter: str
    grid: list
    mean_oc: list
    se_oc: list
    best: float

    def rows(self):
        return [(g, m, s) for g, m, s in zip(self.grid, self.mean_oc, self.se_oc)]


def tune(kind, grid, problem, budget, replications, seed, belief="independent", threads=None) -> TuneResult:
    """Grid search of a policy's parameter on common random numbers.

    Every grid point sees the same truths and observations.  Returns the
    point with the smallest mean final OC; ties go to the smaller value.
    """
    kind = PolicyKind(kind)
    if kind not in TUNABLE:
        raise ConfigError(f"policy {kind.value!r} has no tunable parameter")
    values = sorted(float(g) for g in grid)
    if not values:
        raise ConfigError("tuning grid is empty")
    if len(set(values)) != len(values):
        raise ConfigError("tuning grid has duplicate values")
    param = TUNABLE[kind]
    specs = [PolicySpec.make(kind, belief=belief, name=f"{param}={v!r}", **{param: v}) for v in values]
    reps = run_replications(problem, specs, budget, replications, seed, threads, policy_purpose="tuning")
    result = aggregate(reps, ratio_enabled=False)
    means = [result.policies[s.name].mean_oc for s in specs]
    ses = [result.policies[s.name].se_oc for s in specs]
    best = values[int(np.argmin(means))]
    return TuneResult(kind, param, values, means, ses, best)
