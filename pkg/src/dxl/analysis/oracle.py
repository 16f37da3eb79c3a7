"""Closed-form Ising X decay: each spin dephases in the static fields of the others."""

import numpy as np

from ..kernels import ising_site_products
from ..model import DipolarModel, coupling_matrix, sample_positions
from ..parallel import ordered_map
from ..quantum.conventions import kappa as calibrated_kappa
from ..traces import CorrelatorTrace, check_grid


def ising_site_average(couplings, t_grid):
    """Site average of ``prod_{j != i} cos(kappa J_ij t)`` for one geometry."""
    J = np.asarray(couplings.values, dtype=float)
    return ising_site_products(J, np.asarray(t_grid, dtype=float), calibrated_kappa()).mean(axis=1)


def ising_classical_oracle(couplings, t_grid, threads=None):
    """Average the Ising X correlator over a batch of coupling matrices.

    Stderr is the spread between geometries divided by ``sqrt(M)``.
    """
    t = check_grid(t_grid)
    batch = list(couplings) if not hasattr(couplings, "values") else [couplings]
    per = np.array(ordered_map(lambda c: ising_site_average(c, t), batch, threads))
    mean = per.mean(axis=0)
    err = per.std(axis=0, ddof=1) / np.sqrt(len(batch)) if len(batch) > 1 else np.zeros_like(mean)
    meta = {"solver": "oracle-ising", "m": len(batch), "n": batch[0].n}
    return CorrelatorTrace("X", t, mean, err, meta)


def sample_geometry_batch(n, m, model=DipolarModel(), seed=0):
    """``m`` dipolar coupling matrices for ``n`` spins, realization k keyed by index k."""
    return [coupling_matrix(sample_positions(n, model, seed, k), model) for k in range(m)]
