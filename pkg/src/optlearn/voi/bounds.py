"""Worst-case approximation ratio of the knowledge-gradient policy."""
from __future__ import annotations

import math
from fractions import Fraction

from ..errors import UsageError

# Below this size the rational value is computed exactly and rounded once.
EXACT_LIMIT = 1024


def lp_bound(n: int) -> float:
    """Optimal value ``1 - ((N-1)/N)**N`` of the greedy-analysis linear program.

    The program minimizes ``sum(a)`` subject to
    ``sum(a[:t]) + N * a[t] >= 1`` for ``t = 0 .. N-1``.
    Exact rational arithmetic gives the correctly rounded value up to
    ``EXACT_LIMIT``; beyond that ``-expm1(N * log1p(-1/N))`` keeps full
    precision.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise UsageError(f"N must be a positive integer, got {n!r}")
    n = int(n)
    if n <= EXACT_LIMIT:
        return float(1 - Fraction(n - 1, n) ** n)
    return -math.expm1(n * math.log1p(-1.0 / n))


def kg_guarantee_bound(n: int) -> float:
    """Lower bound on the knowledge-gradient prior-value relative to the optimum.

    Holds under a submodular value of information; equals 1 when ``N = 1``
    and decreases towards ``1 - 1/e``.
    """
    return lp_bound(n)
