"""Short-time decay rates from second-order perturbation theory."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..model import axis_index
from ..quantum.conventions import kappa as calibrated_kappa

GLOBAL = "Global"
LOCAL = "Local"


@dataclass(frozen=True)
class EarlyTimeRate:
    kind: str
    gamma: float  # units of J
    sum_sq: float  # site average of sum_j J_ij**2

    def decay(self, t):
        """Leading-order ``1 - C(t) = (gamma t)**2 / 2``."""
        return 0.5 * (self.gamma * np.asarray(t, dtype=float)) ** 2


def anisotropy_factor(g, kind, axis="X"):
    """Weight of the exchange terms that do not commute with the probe.

    The local correlator along ``mu`` is dephased by the two other exchange
    components, ``sum_{nu != mu} g_nu**2``.  The Ramsey signal along x only
    feels the difference of the y and z couplings.  For XXZ vectors these
    reduce to ``g_x**2 + g_z**2`` and ``(g_x - g_z)**2``.
    """
    gx, gy, gz = g.as_tuple()
    if kind == GLOBAL:
        return (gy - gz) ** 2
    if kind == LOCAL:
        gv = np.array([gx, gy, gz])
        mu = axis_index(axis)
        return float(np.sum(gv**2) - gv[mu] ** 2)
    raise InputError(f"unknown rate kind {kind!r}; use {GLOBAL!r} or {LOCAL!r}")


def early_time_rates(g, couplings, kind, axis="X"):
    """``Gamma**2 = kappa**2 <sum_j J_ij**2> * factor``, averaged over sites i."""
    s = float(np.mean(couplings.sum_sq_per_site()))
    gamma2 = calibrated_kappa() ** 2 * s * anisotropy_factor(g, kind, axis)
    return EarlyTimeRate(kind, math.sqrt(max(gamma2, 0.0)), s)
