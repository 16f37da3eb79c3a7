import math

import numpy as np
import pytest

from dxl.model import CouplingMatrix, DipolarModel, coupling_matrix, sample_positions


@pytest.fixture
def pair_couplings():
    def make(j=1.0):
        return CouplingMatrix(np.array([[0.0, j], [j, 0.0]]), "pair")
    return make


@pytest.fixture
def dipolar():
    """Dipolar couplings for ``n`` random spins (hard core keeps them tame)."""
    def make(n, seed=0, index=0, r_min=None):
        model = DipolarModel(r_min=r_min)
        return coupling_matrix(sample_positions(n, model, seed, index), model)
    return make


def stretched(t, tau, nu, a=1.0):
    return a * np.exp(-((np.asarray(t) / tau) ** nu))


SQRT3 = math.sqrt(3.0)
