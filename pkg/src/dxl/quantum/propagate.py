"""Time evolution of full-space state batches on a sector-blocked Hamiltonian.

Two interchangeable propagators are provided.  ``DensePropagator`` diagonalizes
every block once and evolves spectrally (exact up to rounding);
``KrylovPropagator`` takes Lanczos steps of at most ``max_step`` and refines
an interval when a step fails its error estimate.
"""

import math

import numpy as np

from ..errors import AccuracyError, InputError
from ..traces import check_grid
from .krylov import MAX_DIM, TOL, krylov_propagate, row_sum_bound

DENSE_MAX_N = 10
DEFAULT_STEP = 0.01  # in 1/J
MAX_REFINE = 6


class DensePropagator:
    method = "dense"

    def __init__(self, hamiltonian):
        self.hamiltonian = hamiltonian
        self.spectra = []
        for blk in hamiltonian.blocks:
            w, v = np.linalg.eigh(blk.matrix.toarray())
            self.spectra.append((blk.indices, w, v))

    def energies(self):
        return np.concatenate([w for _, w, _ in self.spectra])

    def evolve(self, states, t_grid):
        """Yield the evolved batch at every grid time (including t = 0)."""
        t_grid = check_grid(t_grid)
        psi0 = np.asarray(states, dtype=complex)
        coeffs = [(idx, w, v, v.T @ psi0[idx]) for idx, w, v in self.spectra]
        for t in t_grid:
            out = np.empty_like(psi0)
            for idx, w, v, c in coeffs:
                phase = np.exp(-1j * t * w)
                out[idx] = v @ (phase[:, None] * c if c.ndim == 2 else phase * c)
            yield out


class KrylovPropagator:
    method = "krylov"

    def __init__(self, hamiltonian, max_step=DEFAULT_STEP, tol=TOL, max_dim=MAX_DIM):
        if not max_step > 0:
            raise InputError("Krylov step must be positive")
        self.hamiltonian = hamiltonian
        self.max_step = float(max_step)
        self.tol = tol
        self.max_dim = max_dim
        # one batched recursion on the full matrix: Krylov spaces of a
        # block-diagonal H split by sector anyway, and a single call avoids
        # per-block overhead on the many small sectors
        self._matrix = hamiltonian.to_sparse()
        self._bound = row_sum_bound(self._matrix)

    def step(self, psi, dt):
        return krylov_propagate(self._matrix, psi, dt, self.tol, self.max_dim, self._bound)

    def _advance(self, psi, span, t_start):
        n_sub = max(1, math.ceil(span / self.max_step - 1e-9))
        last = None
        for _ in range(MAX_REFINE + 1):
            h = span / n_sub
            try:
                cur = psi
                for _ in range(n_sub):
                    cur = self.step(cur, h)
                return cur
            except AccuracyError as exc:
                last = exc
                n_sub *= 2
        raise AccuracyError(
            f"Krylov propagation failed on [{t_start:g}, {t_start + span:g}] "
            f"even with step {span / (n_sub // 2):.3g}: {last}"
        )

    def evolve(self, states, t_grid):
        t_grid = check_grid(t_grid)
        psi = np.asarray(states, dtype=complex).copy()
        yield psi
        for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
            psi = self._advance(psi, t1 - t0, t0)
            yield psi


def make_propagator(hamiltonian, method="auto", max_step=DEFAULT_STEP):
    """``method`` is "dense", "krylov" or "auto" (dense up to 10 spins)."""
    if method == "auto":
        method = "dense" if hamiltonian.n <= DENSE_MAX_N else "krylov"
    if method == "dense":
        return DensePropagator(hamiltonian)
    if method == "krylov":
        return KrylovPropagator(hamiltonian, max_step=max_step)
    raise InputError(f"unknown propagation method {method!r}")
