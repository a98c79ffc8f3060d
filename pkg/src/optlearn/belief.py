"""Gaussian belief states and exact Bayesian updating.

Two belief models are supported:

* :class:`IndependentBelief` keeps a mean and a precision per arm.
* :class:`CorrelatedBelief` keeps a mean vector and a full covariance matrix.

Both are immutable; every update returns a new object.  Internally the
independent model works in precisions and the correlated model in
covariances.  Use :meth:`IndependentBelief.from_sd` when starting from
standard deviations (``precision = 1 / sd**2``).

The module also hosts the standard normal helpers used by every scoring
rule: :func:`norm_pdf`, :func:`norm_cdf` and :func:`kg_f_factor`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import special

from .errors import InputError, NumericalDegeneracyError, UsageError

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT_HALF_PI = math.sqrt(0.5 * math.pi)

SYMMETRY_RTOL = 1e-10
PSD_TOL = 1e-8


# ---------------------------------------------------------------------------
# Standard normal helpers
# ---------------------------------------------------------------------------


def _scalar_or_array(values, like):
    return float(values) if np.ndim(like) == 0 else values


def norm_pdf(a):
    """Standard normal density."""
    arr = np.asarray(a, dtype=float)
    return _scalar_or_array(np.exp(-0.5 * arr * arr) / _SQRT_2PI, a)


def norm_cdf(a):
    """Standard normal distribution function, via the complementary error function."""
    arr = np.asarray(a, dtype=float)
    return _scalar_or_array(special.ndtr(arr), a)


def kg_f_factor(a):
    """Return ``f(a) = a * Phi(a) + phi(a)``.

    For negative arguments the naive form cancels catastrophically, so it
    is evaluated as ``phi(a) * (1 - |a| * R(|a|))`` with the Mills ratio
    ``R(t) = sqrt(pi/2) * erfcx(t / sqrt(2))``.
    """
    arr = np.asarray(a, dtype=float)
    out = np.zeros_like(arr)
    pos = arr >= 0
    ap = arr[pos]
    out[pos] = ap * special.ndtr(ap) + np.exp(-0.5 * ap * ap) / _SQRT_2PI
    neg = (arr < 0) & np.isfinite(arr)
    t = -arr[neg]
    mills = _SQRT_HALF_PI * special.erfcx(t / math.sqrt(2.0))
    out[neg] = np.exp(-0.5 * t * t) / _SQRT_2PI * (1.0 - t * mills)
    np.maximum(out, 0.0, out=out)
    return _scalar_or_array(out, a)


# ---------------------------------------------------------------------------
# Belief types
# ---------------------------------------------------------------------------


def _frozen_vector(values, name):
    arr = np.array(values, dtype=float, copy=True).reshape(-1)
    if arr.size == 0:
        raise InputError(f"{name} must contain at least one arm")
    arr.setflags(write=False)
    return arr


def _check_noise_precision(beta_w):
    beta_w = float(beta_w)
    if not (beta_w > 0.0) or math.isnan(beta_w):
        raise InputError(f"noise_precision must be > 0, got {beta_w}")
    return beta_w


@dataclass(frozen=True, eq=False)
class IndependentBelief:
    """Independent normal beliefs ``mu_x ~ N(means[x], 1 / precisions[x])``."""

    means: np.ndarray
    precisions: np.ndarray
    noise_precision: float

    def __post_init__(self):
        means = _frozen_vector(self.means, "means")
        precisions = _frozen_vector(self.precisions, "precisions")
        if means.shape != precisions.shape:
            raise InputError("means and precisions must have the same length")
        if not np.all(np.isfinite(means)):
            raise InputError("means must be finite")
        if not np.all(np.isfinite(precisions)) or np.any(precisions <= 0):
            raise InputError("precisions must be strictly positive and finite")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "precisions", precisions)
        object.__setattr__(self, "noise_precision", _check_noise_precision(self.noise_precision))

    @classmethod
    def from_sd(cls, means, sds, noise_sd):
        sds = np.asarray(sds, dtype=float)
        if np.ndim(sds) == 0:
            sds = np.full(np.size(means), float(sds))
        return cls(means, 1.0 / sds**2, 1.0 / float(noise_sd) ** 2)

    @property
    def n_arms(self):
        return self.means.size

    @property
    def variances(self):
        return 1.0 / self.precisions

    @property
    def sds(self):
        return 1.0 / np.sqrt(self.precisions)

    @property
    def noise_sd(self):
        return 1.0 / math.sqrt(self.noise_precision)

    def to_correlated(self):
        """The same belief expressed with a diagonal covariance."""
        return CorrelatedBelief(self.means, np.diag(self.variances), self.noise_precision)

    def to_dict(self):
        return {
            "means": self.means.tolist(),
            "precisions": self.precisions.tolist(),
            "noise_precision": self.noise_precision,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["means"], data["precisions"], data["noise_precision"])


@dataclass(frozen=True, eq=False)
class CorrelatedBelief:
    """Multivariate normal belief ``mu ~ N(means, covariance)``.

    A zero variance on an arm is allowed (the arm is known exactly).
    """

    means: np.ndarray
    covariance: np.ndarray
    noise_precision: float
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        means = _frozen_vector(self.means, "means")
        cov = np.array(self.covariance, dtype=float, copy=True)
        m = means.size
        if cov.shape != (m, m):
            raise InputError(f"covariance must be {m}x{m}, got {cov.shape}")
        if self.validate:
            if not np.all(np.isfinite(means)) or not np.all(np.isfinite(cov)):
                raise InputError("means and covariance must be finite")
            scale = max(np.max(np.abs(cov)), 1e-300)
            if np.max(np.abs(cov - cov.T)) > SYMMETRY_RTOL * scale:
                raise InputError("covariance is not symmetric")
            trace = max(np.trace(cov), 0.0)
            eig_min = np.linalg.eigvalsh(0.5 * (cov + cov.T))[0]
            if eig_min < -PSD_TOL * max(trace, 1e-300):
                raise InputError(f"covariance is not positive semidefinite (min eigenvalue {eig_min:.3e})")
        cov.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "noise_precision", _check_noise_precision(self.noise_precision))

    @property
    def n_arms(self):
        return self.means.size

    @property
    def variances(self):
        return np.clip(np.diag(self.covariance), 0.0, None)

    @property
    def sds(self):
        return np.sqrt(self.variances)

    @property
    def noise_sd(self):
        return 1.0 / math.sqrt(self.noise_precision)

    def to_dict(self):
        return {
            "means": self.means.tolist(),
            "covariance": self.covariance.tolist(),
            "noise_precision": self.noise_precision,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["means"], data["covariance"], data["noise_precision"])


Belief = Union[IndependentBelief, CorrelatedBelief]


def belief_from_dict(data) -> Belief:
    """Rebuild either belief type from its JSON mapping."""
    if "covariance" in data:
        return CorrelatedBelief.from_dict(data)
    return IndependentBelief.from_dict(data)


# ---------------------------------------------------------------------------
# Updates
# ---------------------------------------------------------------------------


def _check_arm(arm, n_arms):
    if isinstance(arm, bool) or not isinstance(arm, (int, np.integer)):
        raise UsageError(f"arm must be an integer index, got {arm!r}")
    if not 0 <= arm < n_arms:
        raise UsageError(f"arm {arm} out of range [0, {n_arms})")
    return int(arm)


def _check_observation(observation):
    w = float(observation)
    if not math.isfinite(w):
        raise InputError(f"observation must be finite, got {observation!r}")
    return w


def update_independent(belief: IndependentBelief, arm: int, observation: float) -> IndependentBelief:
    """Precision-weighted update of one arm after observing ``observation``."""
    arm = _check_arm(arm, belief.n_arms)
    w = _check_observation(observation)
    beta = belief.precisions[arm]
    beta_w = belief.noise_precision
    means = belief.means.copy()
    precisions = belief.precisions.copy()
    means[arm] = (beta * means[arm] + beta_w * w) / (beta + beta_w)
    precisions[arm] = beta + beta_w
    return IndependentBelief(means, precisions, beta_w)


def _innovation_scale(belief: CorrelatedBelief, arm: int) -> float:
    denom = 1.0 / belief.noise_precision + belief.covariance[arm, arm]
    if not denom > 0.0:
        raise NumericalDegeneracyError(
            f"predictive variance {denom!r} for arm {arm} is not positive"
        )
    return denom


def update_correlated(belief: CorrelatedBelief, arm: int, observation: float) -> CorrelatedBelief:
    """Rank-one Kalman update of a correlated belief.

    Algebraically identical to re-inverting ``inv(Sigma) + beta_W e_x e_x^T``
    but never forms an inverse, so it tolerates singular covariances.
    """
    arm = _check_arm(arm, belief.n_arms)
    w = _check_observation(observation)
    denom = _innovation_scale(belief, arm)
    col = belief.covariance[:, arm].copy()
    means = belief.means + col * ((w - belief.means[arm]) / denom)
    cov = belief.covariance - np.outer(col, col) / denom
    cov = 0.5 * (cov + cov.T)
    return CorrelatedBelief(means, cov, belief.noise_precision, validate=False)


def update(belief: Belief, arm: int, observation: float) -> Belief:
    """Dispatch to the update rule matching the belief type."""
    if isinstance(belief, CorrelatedBelief):
        return update_correlated(belief, arm, observation)
    return update_independent(belief, arm, observation)


def predictive_sd_vector(belief: CorrelatedBelief, arm: int) -> np.ndarray:
    """Change in the mean vector per unit standardized innovation.

    After measuring ``arm`` the next mean vector is distributed as
    ``means + b * Z`` with ``Z ~ N(0, 1)``; this returns ``b``.
    """
    if isinstance(belief, IndependentBelief):
        belief = belief.to_correlated()
    arm = _check_arm(arm, belief.n_arms)
    denom = _innovation_scale(belief, arm)
    return belief.covariance[:, arm] / math.sqrt(denom)
