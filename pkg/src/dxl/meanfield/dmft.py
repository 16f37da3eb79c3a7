"""Self-consistent single-site mean-field dynamics.

Spin ``i`` sees a Gaussian field with covariance

    D_i^mu(t) = kappa^2 g_mu^2 sum_j J_ij^2 C_j^mu(t),

and its autocorrelators ``C_i^mu`` are recomputed from the impurity solver
until the L2 distance between input and output traces falls below ``tol``.
The same loop drives the cluster variant in ``cdmft``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConvergenceError, InputError
from ..model import AXES, axis_index
from ..parallel import ordered_map
from ..quantum.conventions import kappa as calibrated_kappa
from ..rng import Purpose
from ..traces import CorrelatorTrace, check_grid
from .impurity import frame_autocorrelators, impurity_evolve
from .noise import NoiseKernel, sample_noise

DAMPING = 0.5
FINE_STEP = 0.01


def fine_grid(t_grid, max_step=FINE_STEP):
    """Uniform grid with spacing <= ``max_step`` containing every output time.

    Returns ``(fine, stride)`` with ``fine[::stride] == t_grid``.
    """
    t = check_grid(t_grid)
    if t.size == 1:
        return t.copy(), 1
    dt = np.diff(t)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * max(1.0, t[-1]):
        raise InputError("mean-field solvers need a uniform time grid")
    stride = max(1, math.ceil(dt[0] / max_step - 1e-9))
    fine = np.linspace(0.0, t[-1], (t.size - 1) * stride + 1)
    return fine, stride


def l2_distance(c1, c2, times):
    """``(1/T) int_0^T |c1 - c2|^2 dt`` along the last axis (trapezoid rule)."""
    diff = np.abs(np.asarray(c1) - np.asarray(c2)) ** 2
    span = times[-1] - times[0]
    if span <= 0:
        return diff[..., 0]
    return np.trapezoid(diff, times, axis=-1) / span


@dataclass
class MeanFieldResult:
    """Per-spin traces, shape (3, N, T) for values and stderr (axes X, Y, Z)."""

    solver: str
    times: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    iterations: int
    distances: list
    converged: bool
    metadata: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.values.shape[1]

    def spin_trace(self, axis, spin):
        mu = axis_index(axis)
        return CorrelatorTrace(AXES[mu], self.times, self.values[mu, spin],
                               self.stderr[mu, spin], dict(self.metadata, spin=spin))

    def trace(self, axis):
        """Average over spins; stderr combines the per-spin errors."""
        mu = axis_index(axis)
        v = self.values[mu].mean(axis=0)
        e = np.sqrt(np.sum(self.stderr[mu] ** 2, axis=0)) / self.n
        return CorrelatorTrace(AXES[mu], self.times, v, e, dict(self.metadata))

    def convergence_log(self):
        return "\n".join(f"iteration {k + 1}: max L2 distance {d:.6e}"
                         for k, d in enumerate(self.distances))


def self_consistent_loop(solver, units, bath_weights, g, t_grid, solve_unit,
                         tol, max_iter, damping=DAMPING, threads=None, seed=0):
    """Generic damped fixed-point iteration over independent solve units.

    ``units`` are tuples of spin indices solved together; ``bath_weights``
    (N x N) holds the J_ij^2 entries that feed the noise kernels.
    ``solve_unit(unit, kernels, fine, iteration)`` returns (mean, stderr),
    each shaped (3, len(unit), T_fine).
    """
    if max_iter < 1:
        raise InputError("max_iter must be at least 1")
    if not 0 < damping <= 1:
        raise InputError("damping must lie in (0, 1]")
    fine, stride = fine_grid(t_grid)
    n = bath_weights.shape[0]
    k2 = calibrated_kappa() ** 2
    g2 = g.as_array() ** 2
    C = np.ones((3, n, fine.size))
    distances = []
    for it in range(1, max_iter + 1):
        kernels = k2 * g2[:, None, None] * np.einsum("ij,mjt->mit", bath_weights, C)
        results = ordered_map(
            lambda u: solve_unit(u, kernels[:, list(u)], fine, it), units, threads
        )
        new = np.empty_like(C)
        err = np.empty_like(C)
        for u, (mean, se) in zip(units, results):
            new[:, list(u)] = mean
            err[:, list(u)] = se
        dist = float(np.max(l2_distance(new, C, fine))) if n else 0.0
        distances.append(dist)
        if dist < tol:
            meta = {"solver": solver, "n": n, "g": g.as_tuple(), "iterations": it,
                    "seed": seed, "tol": tol}
            return MeanFieldResult(solver, fine[::stride], new[..., ::stride],
                                   err[..., ::stride], it, distances, True, meta)
        C = (1.0 - damping) * C + damping * new
    raise ConvergenceError(
        f"{solver} did not converge in {max_iter} iterations "
        f"(last max L2 distance {distances[-1]:.3e}, tol {tol:.1e})",
        distances,
    )


def solve_classical_site(i, kernels, fine, iteration, n_noise, seed, purpose=Purpose.DMFT_NOISE):
    """Impurity autocorrelators of one spin; kernels has shape (3, T)."""
    fields = []
    for mu in range(3):
        ker = NoiseKernel(AXES[mu], fine, kernels[mu], spin=i)
        fields.append(sample_noise(ker, n_noise, seed, iteration, i, mu, clip=True, purpose=purpose))
    frames = impurity_evolve(*fields, fine)
    return frame_autocorrelators(frames)


def dmft_solve(couplings, g, t_grid, n_noise=1000, tol=1e-2, max_iter=50, seed=0,
               damping=DAMPING, threads=None):
    """Single-site self-consistent solution; returns a MeanFieldResult."""
    if n_noise < 2:
        raise InputError("n_noise must be at least 2")
    J = np.asarray(couplings.values, dtype=float)

    def solve_unit(unit, kernels, fine, it):
        (i,) = unit
        mean, err = solve_classical_site(i, kernels[:, 0], fine, it, n_noise, seed)
        return mean[:, None], err[:, None]

    units = [(i,) for i in range(J.shape[0])]
    res = self_consistent_loop("dmft", units, J**2, g, t_grid, solve_unit, tol, max_iter,
                               damping, threads, seed)
    res.metadata["n_noise"] = n_noise
    return res
