"""Lanczos approximation of ``exp(-i H dt) v`` for batches of vectors.

Every column runs its own Lanczos recursion (with full reorthogonalization)
in lockstep with the others, so one sparse-times-dense product serves the
whole batch.  The subspace grows until the a-posteriori error estimate
``beta_0 * beta_{m+1} * |[exp(-i T_m dt)]_{m,1}|`` falls below ``tol`` for
every column, or a column's recursion terminates exactly.
"""

import numpy as np

from ..errors import AccuracyError

MAX_DIM = 40
TOL = 1e-10


def _small_exp_first_column(alpha, beta, dt):
    """``exp(-i T dt) e_1`` for a stack of tridiagonal matrices.

    alpha: (k, m), beta: (k, m-1).  Returns (k, m) complex.
    """
    k, m = alpha.shape
    T = np.zeros((k, m, m))
    ar = np.arange(m)
    T[:, ar, ar] = alpha
    if m > 1:
        T[:, ar[:-1], ar[1:]] = beta
        T[:, ar[1:], ar[:-1]] = beta
    w, U = np.linalg.eigh(T)
    coeff = np.exp(-1j * dt * w) * U[:, 0, :]
    return np.einsum("kij,kj->ki", U, coeff)


def row_sum_bound(matrix):
    """Cheap upper bound on the spectral norm (max absolute row sum)."""
    if matrix.shape[0] == 0:
        return 0.0
    return float(abs(matrix).sum(axis=1).max())


def krylov_propagate(matrix, states, dt, tol=TOL, max_dim=MAX_DIM, norm_bound=None):
    """Advance ``states`` (shape (d,) or (d, k)) by ``exp(-i H dt)``.

    Columns need not be normalized; zero columns stay zero.  Raises
    AccuracyError when ``max_dim`` Lanczos vectors do not reach ``tol``.
    ``norm_bound`` may be passed to skip recomputing ``row_sum_bound``.
    """
    v = np.asarray(states, dtype=complex)
    single = v.ndim == 1
    if single:
        v = v[:, None]
    d, k = v.shape
    if dt == 0.0 or d == 0:
        return (v[:, 0] if single else v).copy()
    beta0 = np.linalg.norm(v, axis=0)
    live = beta0 > 0.0
    out = np.zeros_like(v)
    if not np.any(live):
        return out[:, 0] if single else out
    cols = np.nonzero(live)[0]
    q = v[:, cols] / beta0[cols]
    kk = cols.size
    max_dim = min(max_dim, d)

    # layout (column, lanczos index, component) keeps the projections as
    # batched matrix products
    cap = min(max_dim, 8)
    basis = np.empty((kk, cap, d), dtype=complex)
    alpha = np.zeros((kk, max_dim))
    beta = np.zeros((kk, max_dim))
    basis[:, 0] = q.T
    # a column whose recursion terminated keeps its dimension from then on
    dims = np.full(kk, max_dim)
    done = np.zeros(kk, dtype=bool)
    err = np.full(kk, np.inf)
    if norm_bound is None:
        norm_bound = row_sum_bound(matrix)
    # small floor keeps exact terminations from amplifying rounding noise
    breakdown = 1e-12 * max(1.0, norm_bound)

    m = 0
    while True:
        cur = basis[:, m]
        w = np.ascontiguousarray((matrix @ cur.T).T)
        a = np.real(np.einsum("kd,kd->k", cur.conj(), w))
        alpha[:, m] = a
        w -= cur * a[:, None]
        if m > 0:
            w -= basis[:, m - 1] * beta[:, m - 1, None]
        # full reorthogonalization, applied twice
        prev = basis[:, : m + 1]
        for _ in range(2):
            # <b_j|w> = conj(b_j^T conj(w)); avoids conjugating the basis
            c = np.matmul(prev, w.conj()[:, :, None]).conj()
            w -= np.matmul(prev.transpose(0, 2, 1), c)[:, :, 0]
        b = np.linalg.norm(w, axis=1)
        m += 1
        terminated = (~done) & (b < breakdown)
        dims[terminated] = m
        done |= terminated
        if m >= 2 or np.all(done):
            y = _small_exp_first_column(alpha[:, :m], beta[:, : m - 1], dt)
            err = np.where(done, 0.0, beta0[cols] * b * np.abs(y[:, m - 1]))
            converged = err < tol
            freeze = converged & ~done
            dims[freeze] = m
            done |= freeze
        if np.all(done):
            break
        if m >= max_dim:
            worst = float(np.max(err[~done]))
            raise AccuracyError(
                f"Krylov step dt={dt:g} not converged at dimension {max_dim} "
                f"(error estimate {worst:.2e} > {tol:.0e})"
            )
        beta[:, m - 1] = np.where(done, 0.0, b)
        if m == cap:
            cap = min(max_dim, 2 * cap)
            grown = np.empty((kk, cap, d), dtype=complex)
            grown[:, :m] = basis
            basis = grown
        safe = np.where(b > 0.0, b, 1.0)
        basis[:, m] = np.where(done[:, None], 0.0, w / safe[:, None])

    result = np.zeros((d, kk), dtype=complex)
    for dim in np.unique(dims):
        sel = np.nonzero(dims == dim)[0]
        y = _small_exp_first_column(alpha[sel, :dim], beta[sel, : dim - 1], dt)
        result[:, sel] = np.matmul(basis[sel, :dim].transpose(0, 2, 1), y[:, :, None])[:, :, 0].T
    out[:, cols] = result * beta0[cols]
    return out[:, 0] if single else out
