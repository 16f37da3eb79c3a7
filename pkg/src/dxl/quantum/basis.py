"""Computational basis conventions.

Basis state ``b`` encodes spin ``i`` in bit ``i``; a set bit means spin up
(``S^z = +1/2``).  Pauli matrices act as signed bit flips, so X and Y never
need a full-space matrix.
"""

from functools import lru_cache

import numpy as np

from ..model import axis_index


@lru_cache(maxsize=32)
def popcounts(n):
    states = np.arange(1 << n, dtype=np.int64)
    counts = np.zeros(states.size, dtype=np.int64)
    for i in range(n):
        counts += (states >> i) & 1
    counts.setflags(write=False)
    return counts


@lru_cache(maxsize=32)
def sector_indices(n):
    """Basis states grouped by number of up spins, each sorted ascending."""
    counts = popcounts(n)
    out = []
    for k in range(n + 1):
        idx = np.nonzero(counts == k)[0]
        idx.setflags(write=False)
        out.append(idx)
    return tuple(out)


def spin_z(states, n):
    """``S^z_i`` eigenvalues (+-1/2) for each state, shape (len(states), n)."""
    states = np.asarray(states, dtype=np.int64)
    bits = (states[:, None] >> np.arange(n)) & 1
    return bits - 0.5


def apply_pauli(vectors, site, axis, n):
    """Return ``sigma_site^axis`` applied to full-space vector(s).

    ``vectors`` has shape (2**n,) or (2**n, k).
    """
    mu = axis_index(axis)
    v = np.asarray(vectors)
    dim = 1 << n
    states = np.arange(dim, dtype=np.int64)
    mask = 1 << site
    up = ((states >> site) & 1).astype(bool)
    if mu == 2:
        sign = np.where(up, 1.0, -1.0)
        return v * (sign if v.ndim == 1 else sign[:, None])
    src = states ^ mask
    out = v[src]
    if mu == 0:
        return out
    # <down|Y|up> = i, <up|Y|down> = -i: out[c] = v[c^m] * (-i if c is up else +i)
    phase = np.where(up, -1j, 1j)
    return out * (phase if v.ndim == 1 else phase[:, None])


def pauli_expectation(vectors, site, axis, n):
    """``<v|sigma|v>`` per column (real part)."""
    v = np.asarray(vectors)
    w = apply_pauli(v, site, axis, n)
    return np.real(np.sum(np.conj(v) * w, axis=0))


def product_state_plus_x(n):
    dim = 1 << n
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)


def haar_state(dim, rng):
    """Haar-random unit vector (normalized complex Gaussian)."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


# single-site Paulis in bit order (index 0 = down, 1 = up)
PAULI_BITS = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, 1j], [-1j, 0]], dtype=complex),
    np.array([[-1, 0], [0, 1]], dtype=complex),
)


def site_operator(site, axis, n):
    """Dense ``sigma_site^axis`` on ``n`` spins (small n only)."""
    op = np.ones((1, 1), dtype=complex)
    # kron builds the most significant bit first
    for j in reversed(range(n)):
        op = np.kron(op, PAULI_BITS[axis_index(axis)] if j == site else np.eye(2))
    return op
