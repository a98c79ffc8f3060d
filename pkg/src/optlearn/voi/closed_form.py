"""Closed-form value of information for two independent alternatives.

For ``M = 2`` the value of measuring arm ``i`` a (possibly fractional)
``z_i`` times is

    v(z) = s(z) * f(-|theta1 - theta2| / s(z)),
    s(z)^2 = sum_i var_i**2 * z_i / (noise_var + var_i * z_i),

where ``var_i`` is the prior variance of arm ``i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..belief import IndependentBelief, kg_f_factor, norm_cdf, norm_pdf
from ..errors import InputError


@dataclass(frozen=True)
class TwoArmSetup:
    prior_means: tuple
    prior_variances: tuple
    noise_variance: float

    def __post_init__(self):
        means = tuple(float(v) for v in self.prior_means)
        variances = tuple(float(v) for v in self.prior_variances)
        if len(means) != 2 or len(variances) != 2:
            raise InputError("a two-arm setup needs exactly two means and two variances")
        if any(not v > 0 for v in variances) or not self.noise_variance > 0:
            raise InputError("prior and noise variances must be strictly positive")
        object.__setattr__(self, "prior_means", means)
        object.__setattr__(self, "prior_variances", variances)
        object.__setattr__(self, "noise_variance", float(self.noise_variance))

    @property
    def gap(self):
        return abs(self.prior_means[0] - self.prior_means[1])

    def to_belief(self) -> IndependentBelief:
        return IndependentBelief(self.prior_means, [1.0 / v for v in self.prior_variances],
                                 1.0 / self.noise_variance)

    @classmethod
    def from_belief(cls, belief: IndependentBelief):
        if belief.n_arms != 2:
            raise InputError("belief must have exactly two arms")
        return cls(tuple(belief.means), tuple(belief.variances), 1.0 / belief.noise_precision)


def variance_reduction(prior_variance, noise_variance, z):
    """Variance of the change in the posterior mean after ``z`` measurements."""
    z = np.asarray(z, dtype=float)
    return prior_variance**2 * z / (noise_variance + prior_variance * z)


def _variance_reduction_rate(prior_variance, noise_variance, z):
    # d/dz of variance_reduction, i.e. 2 * sigma_tilde * sigma_tilde'
    return prior_variance**2 * noise_variance / (noise_variance + prior_variance * z) ** 2


def _spread(setup, z):
    z1, z2 = (float(v) for v in z)
    if z1 < 0 or z2 < 0:
        raise InputError(f"allocations must be >= 0, got {z}")
    r1 = float(variance_reduction(setup.prior_variances[0], setup.noise_variance, z1))
    r2 = float(variance_reduction(setup.prior_variances[1], setup.noise_variance, z2))
    return z1, z2, r1, r2


def voi_two_alt_closed(setup: TwoArmSetup, z) -> float:
    _, _, r1, r2 = _spread(setup, z)
    s = math.sqrt(r1 + r2)
    if s == 0.0:
        return 0.0
    return s * kg_f_factor(-setup.gap / s)


def voi_two_alt_derivatives(setup: TwoArmSetup, z):
    """Return ``(dv/dz1, d2v/dz1dz2)`` from their analytic expressions."""
    z1, z2, r1, r2 = _spread(setup, z)
    if z1 <= 0 or z2 <= 0:
        raise InputError("derivatives need strictly positive allocations")
    var1, var2 = setup.prior_variances
    noise = setup.noise_variance
    # sigma_tilde_i * sigma_tilde_i'
    g1 = 0.5 * _variance_reduction_rate(var1, noise, z1)
    g2 = 0.5 * _variance_reduction_rate(var2, noise, z2)
    s = math.sqrt(r1 + r2)
    d = setup.gap
    u = -d / s
    first = g1 / s * (kg_f_factor(u) + d * norm_cdf(u) / s)
    cross = g1 * g2 / s**3 * norm_pdf(u) * (d * d / (r1 + r2) - 1.0)
    return first, cross


def submodular_region_check(setup: TwoArmSetup, z) -> bool:
    """Whether ``z`` lies where the cross-derivative of ``v`` is non-positive."""
    z1, z2 = (float(v) for v in z)
    var1, var2 = setup.prior_variances
    noise = setup.noise_variance
    lhs = 1.0 / (1.0 / var1 + z1 / noise) + 1.0 / (1.0 / var2 + z2 / noise)
    rhs = var1 + var2 - setup.gap**2
    return bool(lhs <= rhs)


def fd_step(z, rel=1e-4):
    return rel * max(1.0, abs(float(z)))


def finite_difference_hessian(setup: TwoArmSetup, z, rel=1e-4):
    """Central-difference Hessian of :func:`voi_two_alt_closed` at ``z``."""
    z = np.asarray(z, dtype=float)
    h = np.array([fd_step(z[0], rel), fd_step(z[1], rel)])
    v = lambda p: voi_two_alt_closed(setup, p)  # noqa: E731
    hess = np.empty((2, 2))
    for i in range(2):
        e = np.zeros(2)
        e[i] = h[i]
        hess[i, i] = (v(z + e) - 2.0 * v(z) + v(z - e)) / h[i] ** 2
    e1 = np.array([h[0], 0.0])
    e2 = np.array([0.0, h[1]])
    hess[0, 1] = hess[1, 0] = (
        v(z + e1 + e2) - v(z + e1 - e2) - v(z - e1 + e2) + v(z - e1 - e2)
    ) / (4.0 * h[0] * h[1])
    return hess


def finite_difference_gradient(setup: TwoArmSetup, z, rel=1e-4):
    z = np.asarray(z, dtype=float)
    grad = np.empty(2)
    for i in range(2):
        e = np.zeros(2)
        e[i] = fd_step(z[i], rel)
        grad[i] = (voi_two_alt_closed(setup, z + e) - voi_two_alt_closed(setup, z - e)) / (2 * e[i])
    return grad
