"""A two-arm history on which the knowledge gradient of an arm grows.

With independent normal beliefs and ``theta_1 > theta_2``, observing arm 2
at a value ``W`` in the window

    theta_2 < W <= theta_1 + (beta_2 / beta_W) * (theta_1 - theta_2)

moves ``theta_2`` towards ``theta_1`` without overtaking it, which raises
the knowledge gradient of arm 1.  Diminishing returns along histories
therefore fail even though the expected benefit stays non-negative.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..belief import IndependentBelief, update_independent
from ..errors import InputError, UsageError
from ..policies import kg_score_independent


@dataclass(frozen=True)
class CounterexampleReport:
    window: tuple
    observation: float
    kg_before: float
    kg_after: float
    in_window: bool

    @property
    def increased(self) -> bool:
        return self.kg_after > self.kg_before

    def to_dict(self):
        return {
            "window": list(self.window),
            "observation": self.observation,
            "kg_before": self.kg_before,
            "kg_after": self.kg_after,
            "in_window": self.in_window,
            "increased": self.increased,
        }


def counterexample_window(prior: IndependentBelief):
    """The half-open interval ``(low, high]`` of observations of arm 2 that raise arm 1's KG."""
    if not isinstance(prior, IndependentBelief) or prior.n_arms != 2:
        raise InputError("the counterexample needs an independent belief over two arms")
    t1, t2 = (float(v) for v in prior.means)
    if not t1 > t2:
        raise UsageError(f"arm 0 must lead strictly, got means ({t1}, {t2})")
    b2 = float(prior.precisions[1])
    return t2, t1 + b2 / prior.noise_precision * (t1 - t2)


def adaptive_submodularity_counterexample(prior: IndependentBelief,
                                          observation: Optional[float] = None) -> CounterexampleReport:
    """Knowledge gradient of arm 0 before and after one observation of arm 1.

    Parameters
    ----------
    prior : IndependentBelief
        Two arms with ``means[0] > means[1]``.
    observation : float, optional
        Value observed on arm 1; the window midpoint by default.  Values
        outside the window are evaluated but carry no guarantee.
    """
    low, high = counterexample_window(prior)
    w = 0.5 * (low + high) if observation is None else float(observation)
    before = kg_score_independent(prior, 0)
    after = kg_score_independent(update_independent(prior, 1, w), 0)
    return CounterexampleReport((low, high), w, float(before), float(after), bool(low < w <= high))


def counterexample_sweep(prior: IndependentBelief, n_points: int = 100):
    """Reports for ``n_points`` evenly spaced observations covering ``(low, high]``."""
    low, high = counterexample_window(prior)
    grid = low + (high - low) * np.arange(1, n_points + 1) / n_points
    return [adaptive_submodularity_counterexample(prior, w) for w in grid]
