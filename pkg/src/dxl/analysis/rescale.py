"""Best global time-unit rescaling between two sets of decay times."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InputError

LOG_R_MIN = math.log(0.01)
LOG_R_MAX = math.log(100.0)
GRID_POINTS = 201
GOLDEN_TOL = 1e-12
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class RescaleResult:
    r: float
    cost: float
    residuals: np.ndarray  # r tau_a - tau'_a


def rescale_cost(r, tau, dtau, tau_s, dtau_s):
    """``(1/2N) sum (r tau - tau')**2 / (r**2 dtau**2 + dtau'**2)``."""
    num = (r * tau - tau_s) ** 2
    den = r * r * dtau**2 + dtau_s**2
    return float(np.sum(num / den)) / (2 * tau.size)


def _golden(f, lo, hi):
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > GOLDEN_TOL:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def rescale_fit(experimental, simulated):
    """Find ``r`` minimizing the weighted mismatch of ``r tau`` against ``tau'``.

    Both arguments are sequences of ``(tau, dtau)`` pairs.  A coarse scan of
    ``ln r`` over [ln 0.01, ln 100] brackets the minimum, which golden-section
    search then refines.
    """
    exp = np.asarray(experimental, dtype=float).reshape(-1, 2)
    sim = np.asarray(simulated, dtype=float).reshape(-1, 2)
    if exp.shape[0] == 0 or sim.shape[0] == 0:
        raise InputError("rescale_fit needs non-empty data")
    if exp.shape != sim.shape:
        raise InputError("experimental and simulated lists differ in length")
    if np.any(exp[:, 1] <= 0) or np.any(sim[:, 1] <= 0):
        raise InputError("uncertainties must be positive")
    tau, dtau = exp.T
    tau_s, dtau_s = sim.T

    def cost_log(x):
        return rescale_cost(math.exp(x), tau, dtau, tau_s, dtau_s)

    grid = np.linspace(LOG_R_MIN, LOG_R_MAX, GRID_POINTS)
    costs = np.array([cost_log(x) for x in grid])
    k = int(np.argmin(costs))
    x, c = _golden(cost_log, grid[max(k - 1, 0)], grid[min(k + 1, GRID_POINTS - 1)])
    if c > costs[k]:
        x, c = grid[k], costs[k]
    r = math.exp(x)
    return RescaleResult(r, c, r * tau - tau_s)
