"""Discrete truncated Wigner approximation for spin-1/2 ensembles.

Each spin starts from one of four phase-point vectors with components
``+-1/2`` and is evolved classically under

    ds_i/dt = b_i x s_i,    b_i^mu = g_mu sum_j J_ij s_j^mu.

Correlators are trajectory averages of classical spin products.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, InputError
from .model import AXES, axis_index
from .parallel import ordered_map
from .rng import Purpose, stream
from .traces import CorrelatorTrace, check_grid

RAMSEY = "ramsey"
INFINITE_T = "infinite_temperature"

_ENSEMBLES = {
    RAMSEY: 0.5 * np.array([[1, 1, 1], [1, -1, -1], [1, 1, -1], [1, -1, 1]], dtype=float),
    INFINITE_T: 0.5 * np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float),
}

MAX_STEP = 0.01
NORM_TOL = 1e-6
BATCH = 512


def ensemble(kind):
    try:
        return _ENSEMBLES[kind].copy()
    except KeyError:
        raise InputError(f"unknown dTWA ensemble {kind!r}") from None


@dataclass(frozen=True, eq=False)
class ClassicalSpinConfig:
    kind: str
    spins: np.ndarray  # (..., N, 3)

    @property
    def n(self):
        return self.spins.shape[-2]


def sample_initial_spins(kind, n, seed=0, index=0, count=None):
    """Draw phase-point vectors independently per spin.

    With ``count`` set, returns a batch of shape (count, n, 3).
    """
    pts = ensemble(kind)
    rng = stream(seed, Purpose.DTWA, index)
    shape = (n,) if count is None else (count, n)
    return ClassicalSpinConfig(kind, pts[rng.integers(0, 4, size=shape)])


def enumerate_initial_spins(kind, n):
    """All ``4**n`` phase-point configurations, shape (4**n, n, 3)."""
    pts = ensemble(kind)
    choice = np.array(list(itertools.product(range(4), repeat=n)), dtype=np.int64)
    return ClassicalSpinConfig(kind, pts[choice.reshape(-1, n)])


def _rhs(s, J, g):
    b = np.matmul(J, s) * g
    return np.cross(b, s)


def classical_energy(spins, couplings, g):
    """``sum_{i<j} J_ij sum_mu g_mu s_i^mu s_j^mu`` for each configuration."""
    J = np.asarray(getattr(couplings, "values", couplings), dtype=float)
    s = np.asarray(spins)
    return 0.5 * np.einsum("...im,ij,...jm,m->...", s, J, s, np.asarray(g.as_tuple()))


def choose_step(couplings, g, max_step=MAX_STEP):
    """Step no larger than ``max_step`` and at most 0.1 over the fastest precession rate."""
    J = np.asarray(getattr(couplings, "values", couplings), dtype=float)
    gmax = float(np.max(np.abs(g.as_array())))
    rate = gmax * math.sqrt(3) / 2 * (float(np.abs(J).sum(axis=1).max()) if J.size else 0.0)
    if rate == 0.0:
        return max_step
    return min(max_step, 0.1 / rate)


def _rk4(s, J, gv, t_grid, h_max):
    out = np.empty((t_grid.size,) + s.shape)
    out[0] = s
    for k in range(1, t_grid.size):
        span = t_grid[k] - t_grid[k - 1]
        n_sub = max(1, math.ceil(span / h_max - 1e-9))
        h = span / n_sub
        for _ in range(n_sub):
            k1 = _rhs(s, J, gv)
            k2 = _rhs(s + 0.5 * h * k1, J, gv)
            k3 = _rhs(s + 0.5 * h * k2, J, gv)
            k4 = _rhs(s + h * k3, J, gv)
            s = s + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k] = s
    return out


def integrate_trajectory(config, couplings, g, t_grid, step=None):
    """RK4 integration, reporting spins at every grid time.

    ``config`` may be a ClassicalSpinConfig or an array of shape (..., N, 3).
    Returns an array of shape (T, ..., N, 3).  Without an explicit ``step``
    the step comes from ``choose_step`` and is halved (up to four times)
    while any spin length drifts by more than 1e-6; an explicit step that
    drifts raises AccuracyError.
    """
    t_grid = check_grid(t_grid)
    s = np.array(getattr(config, "spins", config), dtype=float)
    J = np.asarray(getattr(couplings, "values", couplings), dtype=float)
    if s.shape[-2] != J.shape[0]:
        raise InputError("spin configuration and couplings disagree on N")
    gv = g.as_array()
    norm0 = np.linalg.norm(s, axis=-1)
    h = choose_step(J, g) if step is None else float(step)
    for attempt in range(5 if step is None else 1):
        out = _rk4(s, J, gv, t_grid, h)
        drift = float(np.max(np.abs(np.linalg.norm(out, axis=-1) - norm0))) if s.size else 0.0
        if drift <= NORM_TOL:
            return out
        h /= 2
    raise AccuracyError(
        f"spin length drift {drift:.2e} exceeds {NORM_TOL:.0e}; retry with a step below {h:.3g}"
    )


def _trajectory_values(kind, traj, axes):
    """Per-trajectory correlator values, dict axis -> (n_traj, T)."""
    n = traj.shape[-2]
    if kind == RAMSEY:
        return {"Ramsey": (2.0 / n) * traj[..., 0].sum(axis=-1).T}
    out = {}
    for a in axes:
        mu = axis_index(a)
        out[a] = (4.0 / n) * np.einsum("tbi,bi->bt", traj[..., mu], traj[0, ..., mu])
    return out


def _one_geometry(kind, couplings, g, n_t, t_grid, seed, index, axes, sampling, step):
    n = couplings.n
    if sampling == "auto":
        sampling = "enumerate" if 4**n <= n_t else "iid"
    if sampling == "enumerate":
        batches = [enumerate_initial_spins(kind, n).spins]
    elif sampling == "iid":
        spins = sample_initial_spins(kind, n, seed, index, count=n_t).spins
        batches = [spins[i : i + BATCH] for i in range(0, n_t, BATCH)]
    else:
        raise InputError(f"unknown sampling mode {sampling!r}")
    parts = {}
    for b in batches:
        traj = integrate_trajectory(b, couplings, g, t_grid, step)
        for key, vals in _trajectory_values(kind, traj, axes).items():
            parts.setdefault(key, []).append(vals)
    return {key: np.concatenate(v, axis=0) for key, v in parts.items()}, sampling


def dtwa_correlator(kind, couplings, g, n_t, t_grid, seed=0, axes=AXES,
                    sampling="auto", step=None, threads=None):
    """dTWA correlator traces averaged over trajectories and geometries.

    ``couplings`` is one CouplingMatrix or a list of them.  ``sampling`` is
    "iid" (``n_t`` random trajectories per geometry), "enumerate" (all
    ``4**N`` configurations, an exact average of the discrete ensemble) or
    "auto" (enumerate whenever ``4**N <= n_t``).  Stderr is the standard
    error of the per-trajectory values; it is zero for enumerated averages.
    """
    t_grid = check_grid(t_grid)
    ensemble(kind)
    if n_t < 1:
        raise InputError("n_t must be at least 1")
    batch = couplings if isinstance(couplings, (list, tuple)) else [couplings]
    axes = [AXES[axis_index(a)] for a in axes]
    tasks = [(kind, c, g, n_t, t_grid, seed, m, axes, sampling, step) for m, c in enumerate(batch)]
    results = ordered_map(lambda args: _one_geometry(*args), tasks, threads)
    out = {}
    for key in results[0][0]:
        vals = np.concatenate([r[0][key] for r in results], axis=0)
        mean = vals.mean(axis=0)
        if all(r[1] == "enumerate" for r in results):
            err = np.zeros_like(mean)
        else:
            err = vals.std(axis=0, ddof=1) / math.sqrt(vals.shape[0]) if vals.shape[0] > 1 else np.zeros_like(mean)
        meta = {"solver": "dtwa", "kind": kind, "n": batch[0].n, "m": len(batch),
                "n_t": n_t, "seed": seed, "sampling": results[0][1]}
        out[key] = CorrelatorTrace(key, t_grid, mean, err, meta)
    return out
