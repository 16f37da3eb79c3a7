"""Grouping of strongly coupled spins into clusters."""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import InputError


@dataclass(frozen=True, eq=False)
class ClusterPartition:
    threshold: float
    clusters: tuple  # tuples of spin indices, ordered by smallest member
    labels: np.ndarray  # labels[i] = smallest member of i's cluster

    def cluster_of(self, i):
        return self.clusters[self._position[int(self.labels[i])]]

    @property
    def _position(self):
        return {c[0]: k for k, c in enumerate(self.clusters)}

    @property
    def sizes(self):
        return [len(c) for c in self.clusters]

    def submatrices(self, couplings):
        J = np.asarray(couplings.values)
        return [J[np.ix_(c, c)] for c in self.clusters]


def cluster_partition(couplings, threshold):
    """Connected components of the graph with edges ``|J_ij| >= threshold``."""
    if not threshold > 0:
        raise InputError("cluster threshold must be positive")
    J = np.asarray(couplings.values)
    n = J.shape[0]
    adj = np.abs(J) >= threshold
    np.fill_diagonal(adj, False)
    _, comp = connected_components(csr_matrix(adj), directed=False)
    members = {}
    for i in range(n):
        members.setdefault(int(comp[i]), []).append(i)
    clusters = tuple(sorted((tuple(m) for m in members.values()), key=lambda c: c[0]))
    labels = np.empty(n, dtype=np.int64)
    for c in clusters:
        labels[list(c)] = c[0]
    return ClusterPartition(float(threshold), clusters, labels)
