from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import InputError, ResourceError
from .basis import sector_indices, spin_z

DEFAULT_CAP = 20


@dataclass(frozen=True, eq=False)
class HamiltonianBlock:
    label: object  # number of up spins, or "all"
    indices: np.ndarray  # full-space basis states of this block, ascending
    matrix: sp.csr_matrix

    @property
    def dim(self):
        return self.indices.size


@dataclass(frozen=True, eq=False)
class SectorBlockedHamiltonian:
    """``H = sum_{i<j} J_ij sum_mu g_mu S_i^mu S_j^mu`` stored block by block."""

    n: int
    anisotropy: object
    couplings: object
    blocks: tuple

    @property
    def dim(self):
        return 1 << self.n

    @property
    def sector_blocked(self):
        return len(self.blocks) > 1

    def to_sparse(self):
        """Full-space CSR matrix (debugging and small systems)."""
        rows, cols, vals = [], [], []
        for blk in self.blocks:
            coo = blk.matrix.tocoo()
            rows.append(blk.indices[coo.row])
            cols.append(blk.indices[coo.col])
            vals.append(coo.data)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dim, self.dim),
        )

    def to_dense(self):
        return self.to_sparse().toarray()

    def matvec(self, v):
        out = np.zeros_like(v, dtype=complex)
        for blk in self.blocks:
            out[blk.indices] = blk.matrix @ v[blk.indices]
        return out


def _block_matrix(indices, n, J, g):
    gx, gy, gz = g.as_tuple()
    dim = indices.size
    s = spin_z(indices, n)
    diag = 0.5 * gz * np.einsum("bi,ij,bj->b", s, J, s)
    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    vals = [diag]
    flip_diff = 0.25 * (gx + gy)
    flip_same = 0.25 * (gx - gy)
    for i in range(n):
        for j in range(i + 1, n):
            jij = J[i, j]
            if jij == 0.0:
                continue
            bi = (indices >> i) & 1
            bj = (indices >> j) & 1
            amp = np.where(bi != bj, flip_diff, flip_same) * jij
            keep = amp != 0.0
            if not np.any(keep):
                continue
            src = np.nonzero(keep)[0]
            target = indices[src] ^ ((1 << i) | (1 << j))
            pos = np.searchsorted(indices, target)
            rows.append(pos)
            cols.append(src)
            vals.append(amp[keep])
    mat = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return mat


def build_hamiltonian(couplings, g, cap=DEFAULT_CAP):
    """Sparse XYZ Hamiltonian, split into total-S^z sectors when g_x == g_y."""
    n = couplings.n
    if n > cap:
        raise ResourceError(f"N={n} exceeds the exact-solver cap of {cap} spins")
    if n < 1:
        raise InputError("empty system")
    J = np.asarray(couplings.values, dtype=float)
    if g.is_xxz:
        blocks = tuple(
            HamiltonianBlock(k, idx, _block_matrix(idx, n, J, g))
            for k, idx in enumerate(sector_indices(n))
        )
    else:
        idx = np.arange(1 << n, dtype=np.int64)
        blocks = (HamiltonianBlock("all", idx, _block_matrix(idx, n, J, g)),)
    return SectorBlockedHamiltonian(n, g, couplings, blocks)
