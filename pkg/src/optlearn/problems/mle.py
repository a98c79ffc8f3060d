"""Maximum-likelihood fitting of a squared-exponential prior covariance.

The prior is ``mu ~ N(mean * 1, Sigma)`` with
``Sigma[x, x'] = scale * exp(-sum_i lengthscales[i] * (x_i - x'_i)**2)``
and observations carry independent noise of variance ``noise_sd**2``.
The constant mean is profiled out in closed form; ``scale``, every
``lengthscales[i]`` and the noise variance are searched by coordinate-wise
grid refinement in log space, then polished with Nelder-Mead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize

from ..belief import CorrelatedBelief, PSD_TOL, update_correlated
from ..errors import FittingError, InputError

N_PASSES = 3
GRID_POINTS = 17
# Coordinate sweeps per pass, repeated until no coordinate improves.
MAX_SWEEPS = 10
# Log-space search windows, relative to the data scale.
_SCALE_RANGE = (1e-2, 1e2)
_RATE_RANGE = (1e-3, 1e3)
_NOISE_RANGE = (1e-6, 1.0)


@dataclass(frozen=True)
class KernelHyperparams:
    """Fitted prior hyperparameters.

    ``lengthscales`` holds the per-dimension decay coefficients of the
    exponent, so a *small* value means a slowly varying (long-range)
    function.  ``flags`` names every parameter that ended on the edge of
    its search range, plus ``"constant_data"`` when the responses had no
    spread.
    """

    scale: float
    lengthscales: tuple
    mean: float
    noise_sd: float = float("nan")
    log_likelihood: float = float("nan")
    flags: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.scale > 0 or any(not v > 0 for v in self.lengthscales):
            raise InputError("scale and lengthscales must be strictly positive")

    @property
    def flagged(self):
        return bool(self.flags)

    def to_dict(self):
        return {
            "scale": self.scale,
            "lengthscales": list(self.lengthscales),
            "mean": self.mean,
            "noise_sd": self.noise_sd,
            "log_likelihood": self.log_likelihood,
            "flags": list(self.flags),
        }


def se_covariance(xa, xb, scale, lengthscales):
    """Squared-exponential covariance between two point sets."""
    xa = np.atleast_2d(np.asarray(xa, dtype=float))
    xb = np.atleast_2d(np.asarray(xb, dtype=float))
    rates = np.asarray(lengthscales, dtype=float)
    diff2 = (xa[:, None, :] - xb[None, :, :]) ** 2
    return scale * np.exp(-np.tensordot(diff2, rates, axes=([2], [0])))


def _profile(x, y, scale, rates, noise_var):
    """Profiled negative log-likelihood, its mean, and the Cholesky factor."""
    k = se_covariance(x, x, scale, rates)
    k[np.diag_indices_from(k)] += noise_var
    try:
        chol = linalg.cho_factor(k, lower=True, check_finite=False)
    except linalg.LinAlgError:
        return math.inf, float("nan"), None
    ones = np.ones_like(y)
    ki_y = linalg.cho_solve(chol, y, check_finite=False)
    ki_1 = linalg.cho_solve(chol, ones, check_finite=False)
    mean = float(ones @ ki_y / (ones @ ki_1))
    resid = y - mean
    quad = float(resid @ linalg.cho_solve(chol, resid, check_finite=False))
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol[0]))))
    nll = 0.5 * (quad + logdet + y.size * math.log(2.0 * math.pi))
    return nll, mean, chol


def replicate_noise_variance(x, y):
    """Pooled within-location variance of repeated design points, or None."""
    groups = {}
    for row, val in zip(map(tuple, np.asarray(x, dtype=float)), y):
        groups.setdefault(row, []).append(val)
    ss, dof = 0.0, 0
    for vals in groups.values():
        if len(vals) > 1:
            ss += float(np.sum((np.asarray(vals) - np.mean(vals)) ** 2))
            dof += len(vals) - 1
    return ss / dof if dof else None


def fit_hyperparams(x, y, noise_var_hint=None):
    """Grid-refined maximum-likelihood hyperparameters for data ``(x, y)``."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float).reshape(-1)
    n, d = x.shape
    if n != y.size:
        raise InputError(f"{n} design points but {y.size} observations")
    if not np.all(np.isfinite(y)):
        raise InputError("observations must be finite")

    flags = []
    spread = float(np.var(y))
    if spread <= 1e-12 * max(1.0, float(np.mean(y)) ** 2):
        flags.append("constant_data")
        spread = 1.0
    width = np.ptp(x, axis=0)
    width[width <= 0] = 1.0

    names = ["scale"] + [f"lengthscale_{i}" for i in range(d)] + ["noise_var"]
    lows = np.log(np.concatenate([
        [_SCALE_RANGE[0] * spread],
        _RATE_RANGE[0] / width**2,
        [_NOISE_RANGE[0] * spread],
    ]))
    highs = np.log(np.concatenate([
        [_SCALE_RANGE[1] * spread],
        _RATE_RANGE[1] / width**2,
        [_NOISE_RANGE[1] * spread],
    ]))

    theta = 0.5 * (lows + highs)
    if noise_var_hint is not None and noise_var_hint > 0:
        theta[-1] = np.clip(math.log(noise_var_hint), lows[-1], highs[-1])

    def nll_at(t):
        return _profile(x, y, math.exp(t[0]), np.exp(t[1:-1]), math.exp(t[-1]))[0]

    win_lo, win_hi = lows.copy(), highs.copy()
    best = nll_at(theta)
    for _ in range(N_PASSES):
        steps = (win_hi - win_lo) / (GRID_POINTS - 1)
        for _sweep in range(MAX_SWEEPS):
            improved = False
            for i in range(theta.size):
                trial = theta.copy()
                for g in np.linspace(win_lo[i], win_hi[i], GRID_POINTS):
                    trial[i] = g
                    val = nll_at(trial)
                    if val < best - 1e-12:
                        best, theta[i], improved = val, g, True
            if not improved:
                break
        win_lo = np.maximum(theta - 2 * steps, lows)
        win_hi = np.minimum(theta + 2 * steps, highs)

    # Local polish: the coordinate grid can stall in curved valleys.
    def bounded_nll(t):
        if np.any(t < lows) or np.any(t > highs):
            return math.inf
        return nll_at(t)

    res = optimize.minimize(bounded_nll, theta, method="Nelder-Mead",
                            options={"xatol": 1e-4, "fatol": 1e-8, "maxiter": 400 * theta.size})
    if res.fun < best:
        best, theta = float(res.fun), np.clip(res.x, lows, highs)

    if not math.isfinite(best):
        raise FittingError("likelihood was not finite anywhere on the grid",
                           {"lows": lows.tolist(), "highs": highs.tolist()})
    span = highs - lows
    for i, name in enumerate(names):
        if theta[i] - lows[i] <= 1e-9 * span[i] or highs[i] - theta[i] <= 1e-9 * span[i]:
            flags.append(f"{name}_at_bound")

    _, mean, _ = _profile(x, y, math.exp(theta[0]), np.exp(theta[1:-1]), math.exp(theta[-1]))
    return KernelHyperparams(
        scale=math.exp(theta[0]),
        lengthscales=tuple(float(v) for v in np.exp(theta[1:-1])),
        mean=mean,
        noise_sd=math.sqrt(math.exp(theta[-1])),
        log_likelihood=-best,
        flags=tuple(flags),
    )


def prior_covariance(arm_coordinates, hyper: KernelHyperparams):
    cov = se_covariance(arm_coordinates, arm_coordinates, hyper.scale, hyper.lengthscales)
    cov = 0.5 * (cov + cov.T)
    eig = np.linalg.eigvalsh(cov)
    if eig[0] < -PSD_TOL * max(np.trace(cov), 1e-300):
        raise FittingError(
            "fitted prior covariance is not positive semidefinite",
            {"min_eigenvalue": float(eig[0]), "trace": float(np.trace(cov)), **hyper.to_dict()},
        )
    return cov


def fit_mle_prior(design_points, observations, arm_coordinates=None, design_arms=None,
                  replicate_rule=True):
    """Fit hyperparameters and build the conditioned correlated belief.

    Parameters
    ----------
    design_points : array, shape (n, d)
        Locations of the design observations, replicates included.
    observations : array, shape (n,)
    arm_coordinates : array, shape (M, d), optional
        Full set of alternatives.  Defaults to the distinct design points.
    design_arms : sequence of int, optional
        Arm index of every design observation; needed to condition the
        belief when ``arm_coordinates`` is given.
    replicate_rule : bool
        If true, the pooled variance of repeated locations seeds the noise
        search.

    Returns
    -------
    (KernelHyperparams, CorrelatedBelief)
    """
    x = np.asarray(design_points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(observations, dtype=float).reshape(-1)
    hint = replicate_noise_variance(x, y) if replicate_rule else None
    hyper = fit_hyperparams(x, y, noise_var_hint=hint)

    if arm_coordinates is None:
        uniq, inverse = np.unique(x, axis=0, return_inverse=True)
        arm_coordinates, design_arms = uniq, inverse.reshape(-1)
    arms = np.asarray(arm_coordinates, dtype=float)
    if arms.ndim == 1:
        arms = arms[:, None]
    if design_arms is None:
        raise InputError("design_arms is required when arm_coordinates is given")

    cov = prior_covariance(arms, hyper)
    belief = CorrelatedBelief(np.full(arms.shape[0], hyper.mean), cov,
                              1.0 / hyper.noise_sd**2, validate=False)
    for arm, obs in zip(design_arms, y):
        belief = update_correlated(belief, int(arm), float(obs))
    return hyper, belief


def loo_residuals(x, y, hyper: KernelHyperparams):
    """Leave-one-out prediction errors of the fitted model (mean held fixed)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float)
    k = se_covariance(x, x, hyper.scale, hyper.lengthscales)
    k[np.diag_indices_from(k)] += hyper.noise_sd**2
    kinv = np.linalg.inv(k)
    return (kinv @ (y - hyper.mean)) / np.diag(kinv)
