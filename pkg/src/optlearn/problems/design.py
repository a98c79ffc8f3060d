"""Latin hypercube designs for the initial prior fit."""
from __future__ import annotations

import numpy as np

from ..errors import UsageError


def default_design_size(n_params: int) -> int:
    """Rule of thumb: ten design points per estimated parameter."""
    return 10 * int(n_params)


def latin_hypercube_design(d, n_points, bounds=None, rng=None):
    """Draw a Latin hypercube sample.

    Parameters
    ----------
    d : int
        Dimension of the design space.
    n_points : int
        Number of points; every coordinate is cut into this many equal bins.
    bounds : sequence of (low, high), optional
        Per-coordinate bounds, defaults to the unit cube.
    rng : numpy.random.Generator, optional

    Returns
    -------
    ndarray, shape (n_points, d)
        Each column holds exactly one point per bin, placed uniformly at
        random within its bin.
    """
    if d < 1:
        raise UsageError(f"dimension must be >= 1, got {d}")
    if n_points < 1:
        raise UsageError(f"n_points must be >= 1, got {n_points}")
    rng = np.random.default_rng(rng)
    if bounds is None:
        bounds = [(0.0, 1.0)] * d
    bounds = np.asarray(bounds, dtype=float).reshape(d, 2)
    if np.any(bounds[:, 1] < bounds[:, 0]):
        raise UsageError("each bound must satisfy low <= high")

    strata = np.column_stack([rng.permutation(n_points) for _ in range(d)])
    unit = (strata + rng.random((n_points, d))) / n_points
    low, high = bounds[:, 0], bounds[:, 1]
    return low + unit * (high - low)
