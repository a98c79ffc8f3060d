"""Independent reference implementations used as test oracles."""
import numpy as np
from scipy import integrate, stats


def explicit_correlated_update(means, cov, noise_precision, arm, w):
    """Posterior via the information form: invert, add the rank-one term, invert back."""
    m = len(means)
    e = np.zeros(m)
    e[arm] = 1.0
    prec = np.linalg.inv(cov) + noise_precision * np.outer(e, e)
    post_cov = np.linalg.inv(prec)
    post_mean = post_cov @ (np.linalg.solve(cov, means) + noise_precision * w * e)
    return post_mean, post_cov


def expected_max_quadrature(a, b):
    """E[max_i(a_i + b_i Z)] - max(a) by adaptive quadrature over Z."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)

    def integrand(z):
        return np.max(a + b * z) * stats.norm.pdf(z)

    # Split at the pairwise crossing points so quad sees smooth pieces.
    cuts = set()
    for i in range(a.size):
        for j in range(i + 1, a.size):
            if b[i] != b[j]:
                c = (a[i] - a[j]) / (b[j] - b[i])
                if -12 < c < 12:
                    cuts.add(c)
    pts = [-12.0] + sorted(cuts) + [12.0]
    total = sum(integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-12)[0]
                for lo, hi in zip(pts[:-1], pts[1:]))
    return total - np.max(a)


def expected_max_monte_carlo(a, b, n, rng):
    z = rng.standard_normal(n)
    vals = np.max(np.asarray(a)[None, :] + np.outer(z, b), axis=1) - np.max(a)
    return vals.mean(), vals.std(ddof=1) / np.sqrt(n)


def f_factor_reference(a):
    """a * Phi(a) + phi(a) straight from scipy, for moderate arguments."""
    return a * stats.norm.cdf(a) + stats.norm.pdf(a)


def lp_recursion(n):
    """Binding-constraint solution a_t = (1 - sum_{i<t} a_i) / N of the greedy LP."""
    total = 0.0
    for _ in range(n):
        total += (1.0 - total) / n
    return total


# Lines recorded by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES = []
