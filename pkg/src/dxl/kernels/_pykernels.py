"""Pure-numpy reference implementations of the hot loops."""

import numpy as np


def ising_site_products(couplings, times, kappa):
    """``out[k, i] = prod_{j != i} cos(kappa * J_ij * t_k)``."""
    J = np.ascontiguousarray(couplings, dtype=float)
    times = np.ascontiguousarray(times, dtype=float)
    out = np.empty((times.size, J.shape[0]))
    for k, t in enumerate(times):
        out[k] = np.prod(np.cos((kappa * t) * J), axis=1)
    return out


def precess_frames(fields, dt):
    """Propagate orthonormal frames under ``dR/dt = [b(t)]_x R`` from R = 1.

    ``fields`` has shape (S, T, 3) with the field at the grid points; over
    interval k the field is held at the mean of its two endpoint values and
    the step is the exact rotation.  Returns frames of shape (S, T, 3, 3).
    """
    b = np.ascontiguousarray(fields, dtype=float)
    dt = np.ascontiguousarray(dt, dtype=float)
    s, t, _ = b.shape
    out = np.empty((s, t, 3, 3))
    R = np.broadcast_to(np.eye(3), (s, 3, 3)).copy()
    out[:, 0] = R
    for k in range(t - 1):
        w = 0.5 * (b[:, k] + b[:, k + 1]) * dt[k]
        angle = np.sqrt(np.einsum("si,si->s", w, w))
        safe = np.where(angle > 0.0, angle, 1.0)
        n = w / safe[:, None]
        sin_a = np.sin(angle)[:, None, None]
        one_cos = (1.0 - np.cos(angle))[:, None, None]
        K = np.zeros((s, 3, 3))
        K[:, 0, 1] = -n[:, 2]
        K[:, 0, 2] = n[:, 1]
        K[:, 1, 0] = n[:, 2]
        K[:, 1, 2] = -n[:, 0]
        K[:, 2, 0] = -n[:, 1]
        K[:, 2, 1] = n[:, 0]
        rot = np.eye(3) + sin_a * K + one_cos * (K @ K)
        R = rot @ R
        out[:, k + 1] = R
    return out


def cluster_autocorrelators(states, n):
    """``Re Tr(U^dag sigma_i^mu U sigma_i^mu) / d`` for a batch of unitaries.

    ``states`` has shape (S, d, d).  With ``m = 1 << i`` and ``sgn = +1`` when
    bit i of c and e agree (else -1), the X, Y and Z traces are sums of
    ``conj(U[c,e]) U[c^m, e^m]``, ``sgn conj(U[c,e]) U[c^m, e^m]`` and
    ``sgn |U[c,e]|^2``.  Returns shape (3, n, S).
    """
    U = np.ascontiguousarray(states, dtype=complex)
    s, d, _ = U.shape
    idx = np.arange(d)
    out = np.empty((3, n, s))
    absq = U.real**2 + U.imag**2
    for i in range(n):
        m = 1 << i
        bit = (idx >> i) & 1
        sgn = np.where(bit[:, None] == bit[None, :], 1.0, -1.0)
        flipped = U[:, idx ^ m][:, :, idx ^ m]
        prod = U.real * flipped.real + U.imag * flipped.imag
        out[0, i] = prod.sum(axis=(1, 2)) / d
        out[1, i] = (sgn * prod).sum(axis=(1, 2)) / d
        out[2, i] = (sgn * absq).sum(axis=(1, 2)) / d
    return out


def rotate_sites(states, ops):
    """Apply per-sample single-site 2x2 operators to every site, in place.

    ``states`` has shape (S, 2**n, K) (C-contiguous complex); ``ops`` has
    shape (S, n, 2, 2) and ``ops[s, i]`` acts on bit i.
    """
    s, d, k = states.shape
    n = ops.shape[1]
    for i in range(n):
        lo = 1 << i
        x = states.reshape(s, d // (2 * lo), 2, lo, k)
        x0 = x[:, :, 0].copy()
        x1 = x[:, :, 1]
        o = ops[:, i, :, :, None, None, None]
        x[:, :, 0] = o[:, 0, 0] * x0 + o[:, 0, 1] * x1
        x[:, :, 1] = o[:, 1, 0] * x0 + o[:, 1, 1] * x1
    return states
