"""Opportunity-cost metrics aggregated over replications."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import UsageError

# Two-sided 90% normal quantile.
Z_90 = 1.645


@dataclass
class PolicySummary:
    name: str
    final_oc: np.ndarray            # (R,)
    final_recommendation: np.ndarray  # (R,)
    oc_trajectory: np.ndarray        # (R, N+1)
    ratio_trajectory: np.ndarray     # (R, N+1) or None
    p_optimal: float
    p_win: float

    @property
    def mean_oc(self) -> float:
        return float(np.mean(self.final_oc))

    @property
    def sd_oc(self) -> float:
        return float(np.std(self.final_oc, ddof=1)) if self.final_oc.size > 1 else 0.0

    @property
    def se_oc(self) -> float:
        return self.sd_oc / np.sqrt(self.final_oc.size)

    def mean_trajectory(self) -> np.ndarray:
        return self.oc_trajectory.mean(axis=0)

    def se_trajectory(self) -> np.ndarray:
        r = self.oc_trajectory.shape[0]
        if r < 2:
            return np.zeros(self.oc_trajectory.shape[1])
        return self.oc_trajectory.std(axis=0, ddof=1) / np.sqrt(r)

    def ratio_band(self):
        """Mean OC ratio per step with its 90% normal-approximation band."""
        if self.ratio_trajectory is None:
            return None
        r = self.ratio_trajectory.shape[0]
        mean = self.ratio_trajectory.mean(axis=0)
        se = (self.ratio_trajectory.std(axis=0, ddof=1) / np.sqrt(r)) if r > 1 else np.zeros_like(mean)
        return mean, mean - Z_90 * se, mean + Z_90 * se


@dataclass
class ExperimentResult:
    policies: dict
    replications: list = field(default_factory=list)
    ratio_enabled: bool = True

    @property
    def names(self):
        return list(self.policies)

    def joint_se(self, a: str, b: str) -> float:
        """Standard error of the paired difference of final OCs."""
        d = self.policies[a].final_oc - self.policies[b].final_oc
        return float(np.std(d, ddof=1) / np.sqrt(d.size)) if d.size > 1 else 0.0


def aggregate(replications, ratio_enabled=True) -> ExperimentResult:
    """Summaries across replications, reduced in replication order.

    P(win) awards every policy tied at the replication's smallest final OC.
    The OC ratio divides by ``max(truth)``, which must then be positive.
    """
    if not replications:
        raise UsageError("aggregate needs at least one replication")
    names = list(replications[0].runs)
    ocs = {n: np.array([rep.opportunity_costs(n) for rep in replications]) for n in names}
    for n, arr in ocs.items():
        if np.any(arr < 0):
            raise ArithmeticError(f"negative opportunity cost for {n}")
    ratios = None
    if ratio_enabled:
        best = np.array([float(np.max(rep.truth)) for rep in replications])
        if np.any(best <= 0):
            raise UsageError("OC ratio needs a positive best true mean; disable ratios for this problem")
        ratios = {n: ocs[n] / best[:, None] for n in names}
    finals = np.column_stack([ocs[n][:, -1] for n in names])
    winners = finals == finals.min(axis=1, keepdims=True)
    policies = {}
    for j, n in enumerate(names):
        recs = np.array([rep.runs[n].final_recommendation for rep in replications])
        policies[n] = PolicySummary(
            name=n,
            final_oc=finals[:, j],
            final_recommendation=recs,
            oc_trajectory=ocs[n],
            ratio_trajectory=None if ratios is None else ratios[n],
            p_optimal=float(np.mean(finals[:, j] == 0.0)),
            p_win=float(np.mean(winners[:, j])),
        )
    return ExperimentResult(policies, list(replications), ratio_enabled)
