"""Two-spin closed forms and their average over Gaussian pair positions."""

import math

import numpy as np

from ..errors import InputError
from ..rng import Purpose, stream
from ..traces import CorrelatorTrace, check_grid
from .conventions import kappa, pair_closed_form

CHUNK = 100_000


def pair_exact(g, j_pair, axis, t):
    """``prod_{nu != mu} cos(kappa g_nu J t)``; broadcasts over ``j_pair`` and ``t``."""
    return pair_closed_form(g, j_pair, axis, t, kappa())


def pair_disorder_average(g, axis, t_grid, length=1.0, n_samples=100_000, seed=0):
    """Average ``pair_exact`` over two spins at i.i.d. Gaussian positions.

    Each coordinate has standard deviation ``length``.  Couplings are
    ``(3 cos^2 theta - 1) / r^3`` with ``r`` measured in the mean pair
    distance ``4 length / sqrt(pi)``, so times come out in ``1/J`` for the
    typical pair.  The empirical mean distance is stored in the metadata.
    """
    t_grid = check_grid(t_grid)
    if not length > 0:
        raise InputError("length scale must be positive")
    if n_samples < 1:
        raise InputError("n_samples must be at least 1")
    rng = stream(seed, Purpose.PAIR)
    a_typ = 4.0 * length / math.sqrt(math.pi)
    s1 = np.zeros(t_grid.size)
    s2 = np.zeros(t_grid.size)
    dist_sum = 0.0
    done = 0
    while done < n_samples:
        m = min(CHUNK, n_samples - done)
        r = rng.normal(0.0, length, (m, 3)) - rng.normal(0.0, length, (m, 3))
        dist = np.sqrt(np.einsum("ij,ij->i", r, r))
        cos2 = (r[:, 2] / dist) ** 2
        j = (3.0 * cos2 - 1.0) / (dist / a_typ) ** 3
        c = pair_exact(g, j[:, None], axis, t_grid[None, :])
        s1 += c.sum(axis=0)
        s2 += (c * c).sum(axis=0)
        dist_sum += dist.sum()
        done += m
    mean = s1 / n_samples
    if n_samples > 1:
        var = np.maximum(s2 / n_samples - mean**2, 0.0) * n_samples / (n_samples - 1)
        err = np.sqrt(var / n_samples)
    else:
        err = np.zeros_like(mean)
    meta = {"solver": "pair", "n_samples": n_samples, "length": length, "seed": seed,
            "mean_distance": dist_sum / n_samples}
    return CorrelatorTrace(str(axis).upper(), t_grid, mean, err, meta)
