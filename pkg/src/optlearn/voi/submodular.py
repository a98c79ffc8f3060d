"""Exhaustive submodularity audit of functions on bounded multisets.

A multiset over ``n`` elements is a count vector ``S`` with
``0 <= S[x] <= cap``.  The marginal gain of one more copy of ``x`` is
``rho_x(S) = g(S + e_x) - g(S)``.  Four equivalent characterizations
of submodularity are checked independently on the full table:

1. ``rho_x(S) >= rho_x(T)`` whenever ``S <= T``;
2. ``rho_x(S) >= rho_x(S + e_y)`` for all ``x, y`` (diminishing returns,
   including ``x == y``);
3. ``g(T) <= g(S) + sum_x (T-S)^+_x rho_x(S)
   - sum_x (S-T)^+_x rho_x(S v T - e_x)`` for all ``S, T``;
4. ``g(T) <= g(S) + sum_x (T-S)_x rho_x(S)`` whenever ``S <= T``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from ..errors import InputError

DEFAULT_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class MultisetFunctionTable:
    """Values of ``g`` on every count vector in ``{0..cap}^n``.

    ``values[S]`` is ``g(S)`` with ``S`` used as an index tuple.
    """

    n_elements: int
    cap: int
    values: np.ndarray

    def __post_init__(self):
        if self.n_elements < 1 or self.cap < 1:
            raise InputError("need at least one element and cap >= 1")
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.cap + 1,) * self.n_elements:
            raise InputError(f"table shape {vals.shape} does not cover the cap")
        if not np.all(np.isfinite(vals)):
            raise InputError("table values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, n_elements: int, cap: int, fn: Callable):
        shape = (cap + 1,) * n_elements
        vals = np.empty(shape)
        for idx in np.ndindex(*shape):
            vals[idx] = fn(idx)
        return cls(n_elements, cap, vals)

    @classmethod
    def from_mapping(cls, n_elements: int, cap: int, mapping: Mapping):
        """Build from ``{count tuple: value}``; every vector within the cap must appear."""
        shape = (cap + 1,) * n_elements
        vals = np.empty(shape)
        missing = []
        for idx in np.ndindex(*shape):
            if idx in mapping:
                vals[idx] = mapping[idx]
            else:
                missing.append(idx)
        if missing:
            raise InputError(f"table is incomplete: {len(missing)} count vectors missing, e.g. {missing[0]}")
        return cls(n_elements, cap, vals)

    def __call__(self, counts) -> float:
        return float(self.values[tuple(counts)])


@dataclass
class SubmodularityReport:
    """Outcome of :func:`multiset_submodularity_check`.

    ``statements`` maps 1..4 to whether that characterization held on the
    whole table.  ``witness`` is a violation of statement 2, if any:
    ``rho_x(S) < rho_x(S + e_y)``.
    """

    is_submodular: bool
    statements: dict
    witness: Optional[dict] = None
    tolerance: float = 0.0
    violations: dict = field(default_factory=dict)

    @property
    def equivalence_consistent(self) -> bool:
        return len(set(self.statements.values())) == 1

    def to_dict(self):
        return {
            "is_submodular": self.is_submodular,
            "statements": {str(k): v for k, v in self.statements.items()},
            "equivalence_consistent": self.equivalence_consistent,
            "witness": self.witness,
            "tolerance": self.tolerance,
            "violations": {str(k): v for k, v in self.violations.items()},
        }


def _gains(g, cap):
    """``rho[..., x]`` on the full grid, NaN where ``S_x == cap``."""
    n = g.ndim
    rho = np.full(g.shape + (n,), np.nan)
    for x in range(n):
        d = np.diff(g, axis=x)
        sl = [slice(None)] * n
        sl[x] = slice(0, cap)
        rho[tuple(sl) + (x,)] = d
    return rho


def _statement2(g, tol):
    n = g.ndim
    count, witness = 0, None
    for x in range(n):
        dx = np.diff(g, axis=x)
        for y in range(n):
            # rho_x(S + e_y) - rho_x(S)
            inc = np.diff(dx, axis=y)
            bad = inc > tol
            count += int(bad.sum())
            if witness is None and bad.any():
                s = tuple(int(v) for v in np.argwhere(bad)[0])
                witness = {"S": list(s), "x": x, "y": y,
                           "rho_x_S": float(dx[s]),
                           "rho_x_S_plus_y": float(dx[s] + inc[s])}
    return count, witness


def multiset_submodularity_check(g: MultisetFunctionTable, rtol: float = DEFAULT_RTOL) -> SubmodularityReport:
    """Check diminishing returns exhaustively and audit the equivalent forms.

    The tolerance is ``rtol * max(1, max|g|)``.
    """
    if not isinstance(g, MultisetFunctionTable):
        raise InputError("expected a MultisetFunctionTable")
    vals = g.values
    n, cap = g.n_elements, g.cap
    tol = rtol * max(1.0, float(np.max(np.abs(vals))))

    n2, witness = _statement2(vals, tol)

    coords = np.array(list(itertools.product(range(cap + 1), repeat=n)), dtype=int)
    flat = vals.reshape(-1)
    rho = _gains(vals, cap).reshape(-1, n)
    strides = np.array([(cap + 1) ** (n - 1 - i) for i in range(n)])

    # All ordered pairs (S, T).
    s = coords[:, None, :]
    t = coords[None, :, :]
    sub = np.all(s <= t, axis=2)
    up = np.clip(t - s, 0, None)
    down = np.clip(s - t, 0, None)
    rho_s = np.nan_to_num(rho, nan=0.0)[:, None, :]

    # Statement 1: rho_x(S) >= rho_x(T) for S <= T, where T_x < cap.
    rho_t = rho[None, :, :]
    valid1 = sub[:, :, None] & ~np.isnan(rho_t)
    diff1 = np.where(valid1, np.nan_to_num(rho_t) - rho_s, -np.inf)
    n1 = int(np.sum(diff1 > tol))

    # Statement 4.
    bound4 = flat[:, None] + np.sum(up * rho_s, axis=2)
    n4 = int(np.sum(sub & (flat[None, :] > bound4 + tol)))

    # Statement 3.
    join = np.maximum(s, t)
    idx_join = join @ strides
    loss = np.zeros(sub.shape)
    for x in range(n):
        has = down[:, :, x] > 0
        prev = idx_join - strides[x]
        prev = np.where(has, prev, 0)
        loss += np.where(has, down[:, :, x] * np.nan_to_num(rho[prev, x]), 0.0)
    bound3 = bound4 - loss
    n3 = int(np.sum(flat[None, :] > bound3 + tol))

    statements = {1: n1 == 0, 2: n2 == 0, 3: n3 == 0, 4: n4 == 0}
    return SubmodularityReport(
        is_submodular=n2 == 0,
        statements=statements,
        witness=witness,
        tolerance=tol,
        violations={1: n1, 2: n2, 3: n3, 4: n4},
    )
