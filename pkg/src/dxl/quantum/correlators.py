"""Infinite-temperature local autocorrelators and the global Ramsey signal."""

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..model import AXES, axis_index
from ..rng import Purpose, stream
from ..traces import CorrelatorTrace, check_grid
from .basis import apply_pauli, haar_state, product_state_plus_x
from .propagate import DensePropagator, make_propagator


def _normalize_axes(axes):
    if isinstance(axes, str):
        axes = list(axes.replace(",", ""))
    out = []
    for a in axes:
        a = AXES[axis_index(a)]
        if a not in out:
            out.append(a)
    if not out:
        raise InputError("no axes requested")
    return sorted(out, key=AXES.index)


@dataclass(frozen=True, eq=False)
class TypicalityState:
    """A Haar state ``psi`` and its probes ``sigma_i^mu psi`` for each axis."""

    n: int
    psi: np.ndarray
    probes: dict  # axis -> array (2**n, n), column i = sigma_i^axis psi

    @classmethod
    def draw(cls, n, axes, seed=0, index=0):
        rng = stream(seed, Purpose.HAAR, index)
        psi = haar_state(1 << n, rng)
        probes = {}
        for a in _normalize_axes(axes):
            probes[a] = np.stack([apply_pauli(psi, i, a, n) for i in range(n)], axis=1)
        return cls(n, psi, probes)

    def batch(self):
        """All states as one (2**n, 1 + n * n_axes) matrix, psi first."""
        return np.concatenate([self.psi[:, None]] + list(self.probes.values()), axis=1)


def local_autocorrelator_typicality(
    hamiltonian, axes, t_grid, seed=0, index=0, method="auto", max_step=0.01
):
    """Typicality estimate of ``(1/N) sum_i Tr(sigma_i(t) sigma_i) / 2**N``.

    Returns a dict mapping each axis to a CorrelatorTrace.  One Haar state
    is drawn from ``(seed, index)``; all probes are propagated together.
    """
    t_grid = check_grid(t_grid)
    n = hamiltonian.n
    axes = _normalize_axes(axes)
    state = TypicalityState.draw(n, axes, seed, index)
    prop = make_propagator(hamiltonian, method, max_step)
    values = {a: np.empty(t_grid.size) for a in axes}
    for k, batch in enumerate(prop.evolve(state.batch(), t_grid)):
        psi_t = batch[:, 0]
        col = 1
        for a in axes:
            phi = batch[:, col : col + n]
            col += n
            acc = 0.0
            for i in range(n):
                acc += np.real(np.vdot(apply_pauli(psi_t, i, a, n), phi[:, i]))
            values[a][k] = acc / n
    meta = {"solver": "exact", "estimator": "typicality", "method": prop.method,
            "n": n, "seed": seed, "index": index}
    return {a: CorrelatorTrace(a, t_grid, values[a], None, dict(meta)) for a in axes}


def local_autocorrelator_exact(hamiltonian, axes, t_grid, propagator=None):
    """Exact trace ``(1/N) sum_i Tr(sigma_i(t) sigma_i) / 2**N`` from the spectrum.

    With eigenvectors V and energies E, ``C(t) = (c^T W c + s^T W s) / D`` where
    ``W = (1/N) sum_i |V^T sigma_i V|^2``, ``c = cos(E t)``, ``s = sin(E t)``.
    Practical up to about 12 spins.
    """
    t_grid = check_grid(t_grid)
    n = hamiltonian.n
    dim = hamiltonian.dim
    prop = propagator or DensePropagator(hamiltonian)
    V = np.zeros((dim, dim))
    E = np.empty(dim)
    col = 0
    for idx, w, v in prop.spectra:
        V[idx, col : col + w.size] = v
        E[col : col + w.size] = w
        col += w.size
    out = {}
    for a in _normalize_axes(axes):
        W = np.zeros((dim, dim))
        for i in range(n):
            M = V.T @ apply_pauli(V, i, a, n)
            W += np.abs(M) ** 2
        W /= n
        vals = np.empty(t_grid.size)
        for k, t in enumerate(t_grid):
            c, s = np.cos(E * t), np.sin(E * t)
            vals[k] = (c @ W @ c + s @ W @ s) / dim
        meta = {"solver": "exact", "estimator": "trace", "method": "dense", "n": n}
        out[a] = CorrelatorTrace(a, t_grid, vals, None, meta)
    return out


def global_ramsey(hamiltonian, t_grid, method="auto", max_step=0.01):
    """``C(t) = (2/N) <S^x(t)>`` starting from all spins along +x."""
    t_grid = check_grid(t_grid)
    n = hamiltonian.n
    prop = make_propagator(hamiltonian, method, max_step)
    vals = np.empty(t_grid.size)
    for k, psi in enumerate(prop.evolve(product_state_plus_x(n), t_grid)):
        sx = sum(apply_pauli(psi, i, "X", n) for i in range(n))
        vals[k] = np.real(np.vdot(psi, sx)) / n
    meta = {"solver": "exact", "estimator": "ramsey", "method": prop.method, "n": n}
    return CorrelatorTrace("Ramsey", t_grid, vals, None, meta)
