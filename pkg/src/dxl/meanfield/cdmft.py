"""Cluster mean-field dynamics.

Strongly coupled spins (``|J_ij| >= J_0``) are grouped into clusters that
evolve quantum mechanically under their internal Hamiltonian plus Gaussian
local fields from the rest of the system.  Each Strang step is

    exp(-i H_a h/2)  prod_i exp(-i h b_i . S_i)  exp(-i H_a h/2)

with the fields held at their interval midpoint values.  Clusters of up to
six spins propagate the full unitary and evaluate the exact trace; larger
ones propagate a Haar state and its probes (typicality).
"""

import numpy as np

from ..errors import InputError, ResourceError
from ..model import AXES, CouplingMatrix
from ..kernels import cluster_autocorrelators, rotate_sites
from ..quantum.basis import PAULI_BITS, haar_state
from ..quantum.hamiltonian import build_hamiltonian
from ..rng import Purpose, stream
from .clusters import cluster_partition
from .dmft import DAMPING, fine_grid, self_consistent_loop
from .noise import NoiseKernel, sample_noise

QUANTUM_CAP = 8
DENSE_CLUSTER_MAX = 6


def _site_rotations(b, h):
    """``exp(-i h b . sigma / 2)`` for fields b of shape (S, 3); returns (S, 2, 2)."""
    norm = np.sqrt(np.einsum("si,si->s", b, b))
    half = 0.5 * h * norm
    safe = np.where(norm > 0, norm, 1.0)
    nvec = b / safe[:, None]
    gen = np.einsum("si,iab->sab", nvec, np.stack(PAULI_BITS))
    return np.cos(half)[:, None, None] * np.eye(2) - 1j * np.sin(half)[:, None, None] * gen


def evolve_cluster(h_dense, fields, fine, states, record, record_at):
    """Strang-split evolution of ``states`` (shape (S, d, K), modified in place).

    ``fields`` has shape (S, n, T, 3); ``record(k, states)`` is called at the
    fine indices in ``record_at``.  Adjacent half steps are merged into one
    full step between recorded times.
    """
    n = fields.shape[1]
    w, v = np.linalg.eigh(h_dense)
    wanted = set(int(i) for i in record_at)
    if 0 in wanted:
        record(0, states)
    pending = False  # an opening half step is still owed
    for j in range(fine.size - 1):
        h = fine[j + 1] - fine[j]
        half = (v * np.exp(-0.5j * h * w)) @ v.T
        op = (v * np.exp(-1j * h * w)) @ v.T if pending else half
        states = np.matmul(op, states)
        mid = 0.5 * (fields[:, :, j] + fields[:, :, j + 1])
        ops = np.stack([_site_rotations(mid[:, i], h) for i in range(n)], axis=1)
        rotate_sites(states, ops)
        if j + 1 in wanted or j + 1 == fine.size - 1:
            states = np.matmul(half, states)
            pending = False
            if j + 1 in wanted:
                record(j + 1, states)
        else:
            pending = True
    return states


def solve_quantum_cluster(unit, couplings, g, kernels, fine, iteration, n_noise, seed,
                          record_every=1):
    """Per-spin autocorrelators of one cluster; returns (mean, stderr), (3, n, T).

    Correlators are evaluated every ``record_every`` fine steps and linearly
    interpolated in between.
    """
    n = len(unit)
    if n > QUANTUM_CAP:
        raise ResourceError(f"cluster of {n} spins exceeds the cap of {QUANTUM_CAP}; raise J_0")
    d = 1 << n
    h_dense = build_hamiltonian(CouplingMatrix(couplings, "cluster"), g).to_dense().real
    fields = np.zeros((n_noise, n, fine.size, 3))
    for a, i in enumerate(unit):
        for mu in range(3):
            ker = NoiseKernel(AXES[mu], fine, kernels[mu, a], spin=i)
            fields[:, a, :, mu] = sample_noise(ker, n_noise, seed, iteration, i, mu,
                                               clip=True, purpose=Purpose.CDMFT_NOISE)
    record_at = np.arange(0, fine.size, max(1, int(record_every)))
    if record_at[-1] != fine.size - 1:
        record_at = np.append(record_at, fine.size - 1)
    samples = np.empty((3, n, n_noise, record_at.size))
    slot = {int(k): c for c, k in enumerate(record_at)}

    if n <= DENSE_CLUSTER_MAX:
        states = np.broadcast_to(np.eye(d, dtype=complex), (n_noise, d, d)).copy()

        def record(k, U):
            samples[..., slot[k]] = cluster_autocorrelators(U, n)
    else:
        rng = stream(seed, Purpose.CDMFT_HAAR, iteration, unit[0])
        psi = np.stack([haar_state(d, rng) for _ in range(n_noise)])  # (S, d)
        idx = np.arange(d)
        cols = [psi]
        keys = [(mu, i) for mu in range(3) for i in range(n)]
        for mu, i in keys:
            cols.append(_pauli(psi, mu, i, idx))
        states = np.ascontiguousarray(np.stack(cols, axis=2))

        def record(k, X):
            psi_t = X[:, :, 0]
            for c, (mu, i) in enumerate(keys, start=1):
                sig = _pauli(psi_t, mu, i, idx)
                samples[mu, i, :, slot[k]] = np.einsum("sd,sd->s", sig.conj(), X[:, :, c]).real

    evolve_cluster(h_dense, fields, fine, states, record, record_at)
    mean = samples.mean(axis=2)
    err = samples.std(axis=2, ddof=1) / np.sqrt(n_noise)
    if record_at.size != fine.size:
        tr = fine[record_at]
        mean = np.apply_along_axis(lambda y: np.interp(fine, tr, y), -1, mean)
        err = np.apply_along_axis(lambda y: np.interp(fine, tr, y), -1, err)
    return mean, err


def _pauli(vecs, mu, i, idx):
    """``sigma_i^mu`` applied along the second axis of ``vecs`` (S, d)."""
    m = 1 << i
    up = (idx >> i) & 1
    if mu == 2:
        return vecs * np.where(up == 1, 1.0, -1.0)
    out = vecs[:, idx ^ m]
    if mu == 0:
        return out
    return out * np.where(up == 1, -1j, 1j)


def cdmft_solve(couplings, g, t_grid, j0_cluster=1.75, n_noise=1000, tol=1e-2, max_iter=50,
                seed=0, damping=DAMPING, threads=None):
    """Cluster self-consistent solution; returns a MeanFieldResult.

    Noise kernels of spin ``i`` sum ``J_ij^2 C_j`` over spins outside its own
    cluster only; intra-cluster couplings are treated exactly.  Cluster
    correlators are evaluated on the output grid and interpolated onto the
    fine integration grid that feeds the kernels.
    """
    if n_noise < 2:
        raise InputError("n_noise must be at least 2")
    part = cluster_partition(couplings, j0_cluster)
    too_big = [c for c in part.clusters if len(c) > QUANTUM_CAP]
    if too_big:
        raise ResourceError(
            f"cluster of {len(too_big[0])} spins exceeds the cap of {QUANTUM_CAP}; "
            f"raise J_0 above {j0_cluster}"
        )
    J = np.asarray(couplings.values, dtype=float)
    weights = J**2
    for c in part.clusters:
        weights[np.ix_(c, c)] = 0.0

    _, stride = fine_grid(t_grid)

    def solve_unit(unit, kernels, fine, it):
        sub = J[np.ix_(unit, unit)]
        return solve_quantum_cluster(unit, sub, g, kernels, fine, it, n_noise, seed, stride)

    res = self_consistent_loop("cdmft", list(part.clusters), weights, g, t_grid, solve_unit,
                               tol, max_iter, damping, threads, seed)
    res.metadata.update(n_noise=n_noise, j0_cluster=j0_cluster,
                        cluster_sizes=part.sizes)
    return res
