"""The global factor kappa between ``g J t`` and the ``S = sigma/2`` convention.

Two-spin autocorrelators have the closed form ``prod_{nu != mu} cos(kappa g_nu J t)``.
``calibrate_kappa`` extracts kappa from a dense two-spin evolution and then
checks the closed form against further dense evolutions.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ..errors import NumericalError
from ..model import AXES, ISING, AnisotropyVector, CouplingMatrix, axis_index
from ..rng import Purpose, stream
from .correlators import local_autocorrelator_exact
from .hamiltonian import build_hamiltonian

CHECK_TOL = 1e-12


@dataclass(frozen=True)
class KappaCalibration:
    kappa: float
    raw: float  # value before snapping to a simple fraction
    max_error: float  # worst closed-form vs dense deviation over the checks
    n_checks: int


def _pair_couplings(j):
    return CouplingMatrix(np.array([[0.0, j], [j, 0.0]]), "pair")


def dense_pair_trace(g, j, axis, t):
    """Dense two-spin local autocorrelator at the times ``t`` (starting at 0)."""
    h = build_hamiltonian(_pair_couplings(j), g)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    grid = np.concatenate([[0.0], t]) if t[0] != 0.0 else t
    tr = local_autocorrelator_exact(h, [axis], grid)[AXES[axis_index(axis)]]
    return tr.values[-t.size :]


def calibrate_kappa(n_checks=20, seed=0):
    """Measure kappa on the Ising pair, then validate on random (g, J, t) triples."""
    t0 = 0.5
    c = dense_pair_trace(ISING, 1.0, "X", [t0])[0]
    raw = math.acos(c) / t0
    frac = Fraction(raw).limit_denominator(64)
    kappa = float(frac) if abs(float(frac) - raw) < 1e-12 else raw

    rng = stream(seed, Purpose.CALIBRATION)
    worst = 0.0
    for k in range(n_checks):
        g = AnisotropyVector(*rng.uniform(-1.0, 1.0, 3))
        j = rng.uniform(-2.0, 2.0)
        t = rng.uniform(0.1, 3.0)
        mu = AXES[k % 3]
        dense = dense_pair_trace(g, j, mu, [t])[0]
        closed = pair_closed_form(g, j, mu, t, kappa)
        worst = max(worst, abs(dense - closed))
    if worst > CHECK_TOL:
        raise NumericalError(
            f"two-spin closed form disagrees with dense evolution by {worst:.2e} (kappa={kappa})"
        )
    return KappaCalibration(kappa, raw, worst, n_checks)


def pair_closed_form(g, j, axis, t, kappa):
    gv = g.as_array()
    mu = axis_index(axis)
    out = 1.0
    for nu in range(3):
        if nu != mu:
            out = out * np.cos(kappa * gv[nu] * np.asarray(j) * np.asarray(t))
    return out


@lru_cache(maxsize=1)
def kappa():
    """Calibrated convention factor (computed once per process)."""
    return calibrate_kappa().kappa
