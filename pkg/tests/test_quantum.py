import math

import numpy as np
import pytest
from scipy.linalg import expm

from dxl.errors import AccuracyError, ResourceError
from dxl.model import ISING, AnisotropyVector, CouplingMatrix, parameterize_lambda
from dxl.quantum.basis import apply_pauli, haar_state, sector_indices, site_operator
from dxl.quantum.conventions import calibrate_kappa, dense_pair_trace, kappa
from dxl.quantum.correlators import (global_ramsey, local_autocorrelator_exact,
                                     local_autocorrelator_typicality)
from dxl.quantum.hamiltonian import build_hamiltonian
from dxl.quantum.krylov import krylov_propagate
from dxl.quantum.pair import pair_disorder_average, pair_exact
from dxl.quantum.propagate import DensePropagator, KrylovPropagator

HEIS = AnisotropyVector(1.0, 1.0, 1.0)
XYZ = AnisotropyVector(0.4, -0.9, 1.3)


def kron_hamiltonian(J, g):
    """Reference H from explicit Kronecker products of S = sigma/2."""
    n = J.shape[0]
    h = np.zeros((1 << n, 1 << n), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            for mu, gm in zip("XYZ", g.as_tuple()):
                h += J[i, j] * gm * 0.25 * site_operator(i, mu, n) @ site_operator(j, mu, n)
    return h


def test_heisenberg_pair_spectrum(pair_couplings):
    h = build_hamiltonian(pair_couplings(1.0), HEIS).to_dense()
    np.testing.assert_allclose(np.linalg.eigvalsh(h), [-0.75, 0.25, 0.25, 0.25], atol=1e-14)


@pytest.mark.parametrize("g", [ISING, HEIS, XYZ])
def test_hamiltonian_matches_kron(dipolar, g):
    c = dipolar(5, seed=2)
    h = build_hamiltonian(c, g).to_dense()
    np.testing.assert_allclose(h, kron_hamiltonian(c.values, g), atol=1e-12)
    np.testing.assert_allclose(h, h.conj().T, atol=0)


def test_xxz_is_sector_blocked(dipolar):
    h = build_hamiltonian(dipolar(6), parameterize_lambda(0.3))
    assert h.sector_blocked
    assert [b.dim for b in h.blocks] == [math.comb(6, k) for k in range(7)]
    assert not build_hamiltonian(dipolar(6), XYZ).sector_blocked


def test_size_cap(dipolar):
    with pytest.raises(ResourceError):
        build_hamiltonian(dipolar(6), ISING, cap=5)


def test_sector_indices_partition():
    allidx = np.sort(np.concatenate(sector_indices(5)))
    np.testing.assert_array_equal(allidx, np.arange(32))


def test_kappa_calibration():
    cal = calibrate_kappa()
    assert cal.kappa == 0.5
    assert cal.max_error < 1e-12
    assert kappa() == 0.5


@pytest.mark.parametrize("axis", "XYZ")
def test_pair_closed_form_matches_dense(axis):
    t = np.linspace(0, 4, 9)
    for g in (ISING, HEIS, XYZ):
        np.testing.assert_allclose(pair_exact(g, 1.7, axis, t), dense_pair_trace(g, 1.7, axis, t),
                                   atol=1e-12)


def test_dense_propagator_matches_expm(dipolar):
    c = dipolar(5, seed=3)
    H = build_hamiltonian(c, XYZ)
    rng = np.random.default_rng(0)
    psi = haar_state(32, rng)
    t = np.array([0.0, 0.3, 0.7])
    out = list(DensePropagator(H).evolve(psi, t))
    h = H.to_dense()
    for k, tk in enumerate(t):
        np.testing.assert_allclose(out[k], expm(-1j * h * tk) @ psi, atol=1e-12)


def test_krylov_matches_dense(dipolar):
    c = dipolar(8, seed=1)
    H = build_hamiltonian(c, parameterize_lambda(0.2))
    rng = np.random.default_rng(5)
    psi = np.stack([haar_state(256, rng) for _ in range(3)], axis=1)
    t = np.linspace(0, 1, 6)
    dense = list(DensePropagator(H).evolve(psi, t))
    kry = list(KrylovPropagator(H, max_step=0.05).evolve(psi, t))
    for a, b in zip(dense, kry):
        np.testing.assert_allclose(a, b, atol=1e-9)


def test_krylov_reports_accuracy_failure():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(200, 200))
    h = (a + a.T) * 50
    psi = haar_state(200, rng)[:, None]
    with pytest.raises(AccuracyError):
        krylov_propagate(h, psi, 1.0, tol=1e-14, max_dim=4)


def test_typicality_close_to_trace(dipolar):
    c = dipolar(10, seed=0, r_min=0.3)
    H = build_hamiltonian(c, HEIS)
    t = np.linspace(0, 1, 6)
    ex = local_autocorrelator_exact(H, "X", t)["X"].values
    ty = local_autocorrelator_typicality(H, "X", t, seed=1)["X"].values
    assert ty[0] == pytest.approx(1.0, abs=0.1)
    assert np.max(np.abs(ex - ty)) < 0.1


def test_correlators_start_at_one(dipolar):
    H = build_hamiltonian(dipolar(6), XYZ)
    t = np.array([0.0, 0.5])
    for tr in local_autocorrelator_exact(H, "XYZ", t).values():
        assert tr.values[0] == pytest.approx(1.0, abs=1e-13)
    assert global_ramsey(H, t).values[0] == pytest.approx(1.0, abs=1e-13)


def test_symmetry_freezing(dipolar):
    c = dipolar(6, seed=4)
    t = np.linspace(0, 3, 7)
    heis = global_ramsey(build_hamiltonian(c, HEIS), t)
    np.testing.assert_allclose(heis.values, 1.0, atol=1e-10)
    ising = local_autocorrelator_exact(build_hamiltonian(c, ISING), "Z", t)["Z"]
    np.testing.assert_allclose(ising.values, 1.0, atol=1e-10)


def test_apply_pauli_squares_to_identity():
    rng = np.random.default_rng(2)
    v = haar_state(16, rng)
    for mu in "XYZ":
        np.testing.assert_allclose(apply_pauli(apply_pauli(v, 2, mu, 4), 2, mu, 4), v, atol=1e-15)


def test_pair_disorder_average_basics():
    t = np.linspace(0, 1, 5)
    tr = pair_disorder_average(ISING, "X", t, n_samples=20_000, seed=1)
    assert tr.values[0] == pytest.approx(1.0)
    assert np.all(np.diff(tr.values) < 0)
    assert tr.metadata["mean_distance"] == pytest.approx(4 / math.sqrt(math.pi), rel=0.02)
    same = pair_disorder_average(ISING, "X", t, n_samples=20_000, seed=1)
    np.testing.assert_array_equal(tr.values, same.values)


@pytest.mark.slow
@pytest.mark.parametrize("g,axis", [(ISING, "X"), (XYZ, "X"), (XYZ, "Y")])
def test_pair_average_linear_onset(g, axis):
    # 1 - C ~ s t for 3D pair disorder, s = kappa * 32/(9 sqrt(3) pi) * (|a+b| + |a-b|)
    t = np.linspace(0, 0.02, 21)
    tr = pair_disorder_average(g, axis, t, n_samples=1_000_000, seed=9)
    design = np.column_stack([t[1:], t[1:] ** 2])
    s = np.linalg.lstsq(design, 1 - tr.values[1:], rcond=None)[0][0]
    mu = "XYZ".index(axis)
    a, b = (v for k, v in enumerate(g.as_tuple()) if k != mu)
    want = kappa() * 32 / (9 * math.sqrt(3) * math.pi) * (abs(a + b) + abs(a - b))
    assert s == pytest.approx(want, rel=0.05)
