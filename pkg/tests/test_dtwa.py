import numpy as np
import pytest

from dxl.dtwa import (INFINITE_T, RAMSEY, classical_energy, dtwa_correlator, ensemble,
                      enumerate_initial_spins, integrate_trajectory, sample_initial_spins)
from dxl.errors import AccuracyError, InputError
from dxl.model import ISING, AnisotropyVector, parameterize_lambda
from dxl.quantum.pair import pair_exact


@pytest.mark.parametrize("kind", [RAMSEY, INFINITE_T])
def test_phase_points_reproduce_moments(kind):
    pts = ensemble(kind)
    np.testing.assert_allclose(np.abs(pts), 0.5)
    second = np.einsum("ki,kj->ij", pts, pts) / 4
    np.testing.assert_allclose(second, 0.25 * np.eye(3), atol=1e-15)


def test_ramsey_ensemble_polarized():
    assert np.all(ensemble(RAMSEY)[:, 0] == 0.5)
    np.testing.assert_allclose(ensemble(INFINITE_T).mean(axis=0), 0.0)


def test_unknown_ensemble():
    with pytest.raises(InputError):
        ensemble("thermal")


def test_sampling_is_keyed():
    a = sample_initial_spins(INFINITE_T, 5, seed=3, index=1, count=10).spins
    b = sample_initial_spins(INFINITE_T, 5, seed=3, index=1, count=10).spins
    np.testing.assert_array_equal(a, b)
    assert a.shape == (10, 5, 3)


def test_enumeration_size():
    assert enumerate_initial_spins(RAMSEY, 3).spins.shape == (64, 3, 3)


def test_energy_and_length_conserved(dipolar):
    c = dipolar(6, seed=2, r_min=0.5)
    g = AnisotropyVector(0.3, 0.8, -0.5)
    s0 = sample_initial_spins(INFINITE_T, 6, seed=1, count=4).spins
    t = np.linspace(0, 2, 11)
    traj = integrate_trajectory(s0, c, g, t)
    e = classical_energy(traj, c, g)
    assert np.max(np.abs(e - e[0])) < 1e-5
    np.testing.assert_allclose(np.linalg.norm(traj, axis=-1), np.sqrt(3) / 2, atol=1e-6)


def test_explicit_step_that_drifts_raises(pair_couplings):
    s0 = enumerate_initial_spins(INFINITE_T, 2).spins
    with pytest.raises(AccuracyError):
        integrate_trajectory(s0, pair_couplings(200.0), ISING, np.array([0, 1.0]), step=0.5)


def test_pair_ising_exact_by_enumeration(pair_couplings):
    t = np.linspace(0, 6, 13)
    res = dtwa_correlator(INFINITE_T, pair_couplings(1.0), ISING, 16, t, axes="X")
    np.testing.assert_allclose(res["X"].values, pair_exact(ISING, 1.0, "X", t), atol=1e-9)
    assert res["X"].metadata["sampling"] == "enumerate"
    assert np.all(res["X"].stderr == 0)


def test_ramsey_heisenberg_frozen(dipolar):
    t = np.linspace(0, 1, 5)
    res = dtwa_correlator(RAMSEY, dipolar(5, seed=1), AnisotropyVector(1, 1, 1), 200, t)
    np.testing.assert_allclose(res["Ramsey"].values, 1.0, atol=1e-6)


def test_threads_do_not_change_results(dipolar):
    batch = [dipolar(4, seed=0, index=k) for k in range(3)]
    t = np.linspace(0, 0.5, 4)
    g = parameterize_lambda(0.3)
    a = dtwa_correlator(INFINITE_T, batch, g, 100, t, seed=2, sampling="iid", threads=1)
    b = dtwa_correlator(INFINITE_T, batch, g, 100, t, seed=2, sampling="iid", threads=3)
    for k in a:
        np.testing.assert_array_equal(a[k].values, b[k].values)
