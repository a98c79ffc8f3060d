"""Measurement histories, shared observations and random-stream derivation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import UsageError

# Stable integer keys for the random-stream purposes.
PURPOSES = {"truth": 0, "noise": 1, "policy": 2, "tuning": 3, "design": 4}


def substream(seed: int, replication: int, purpose: str, *extra: int) -> np.random.Generator:
    """Independent generator keyed by ``(seed, replication, purpose, *extra)``.

    The same key always yields the same stream, whichever thread asks for
    it and in whatever order.
    """
    if purpose not in PURPOSES:
        raise UsageError(f"unknown stream purpose {purpose!r}")
    key = (int(replication), PURPOSES[purpose], *(int(e) for e in extra))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


@dataclass
class MeasurementHistory:
    """Ordered ``(arm, observation)`` pairs with per-arm tallies."""

    n_arms: int
    arms: list = field(default_factory=list)
    observations: list = field(default_factory=list)

    def __post_init__(self):
        self._counts = np.zeros(self.n_arms, dtype=int)
        for a in self.arms:
            self._counts[a] += 1

    def append(self, arm: int, observation: float):
        self.arms.append(int(arm))
        self.observations.append(float(observation))
        self._counts[arm] += 1

    @property
    def counts(self) -> np.ndarray:
        return self._counts.copy()

    def __len__(self):
        return len(self.arms)

    def occurrences(self, arm: int) -> int:
        return int(self._counts[arm])


class ObservationLedger:
    """Common random numbers for every policy in one replication.

    The ``k``-th measurement of arm ``x`` always returns the same value,
    no matter which policy asks or when.  Draws are generated lazily from a
    per-arm stream and cached.

    Parameters
    ----------
    truth : array
        True means of this replication.
    sampler : callable ``(arm, truth, rng) -> float``
        Draws one observation of ``arm``.
    stream : callable ``arm -> numpy.random.Generator``
        Builds the dedicated generator of an arm.
    """

    def __init__(self, truth, sampler, stream):
        self.truth = np.asarray(truth, dtype=float)
        self._sampler = sampler
        self._stream = stream
        self._rngs = {}
        self._cache = {}

    @classmethod
    def for_problem(cls, problem, truth, seed, replication):
        return cls(truth, problem.observe,
                   lambda arm: substream(seed, replication, "noise", arm))

    @classmethod
    def gaussian(cls, truth, noise_sd, rng):
        """Ledger with ``N(truth, noise_sd^2)`` draws; arm streams spawned from ``rng``."""
        seq = np.random.SeedSequence(int(rng.integers(2**63)))
        children = seq.spawn(len(truth))

        def sample(arm, mu, r):
            return mu[arm] + noise_sd * r.standard_normal()

        return cls(truth, sample, lambda arm: np.random.default_rng(children[arm]))

    def observation(self, arm: int, k: int) -> float:
        """The ``k``-th (0-based) observation of ``arm``."""
        cache = self._cache.setdefault(arm, [])
        if len(cache) <= k:
            rng = self._rngs.get(arm)
            if rng is None:
                rng = self._rngs[arm] = self._stream(arm)
            while len(cache) <= k:
                cache.append(float(self._sampler(arm, self.truth, rng)))
        return cache[k]

    def drawn(self, arm: int) -> tuple:
        return tuple(self._cache.get(arm, ()))
