import numpy as np
import pytest

from dxl.errors import ConvergenceError, InputError, NumericalError, ResourceError
from dxl.model import ISING, AnisotropyVector, CouplingMatrix, parameterize_lambda
from dxl.meanfield.cdmft import cdmft_solve
from dxl.meanfield.clusters import cluster_partition
from dxl.meanfield.dmft import dmft_solve, fine_grid, l2_distance
from dxl.meanfield.impurity import frame_autocorrelators, impurity_evolve
from dxl.meanfield.noise import NoiseKernel, sample_noise
from dxl.quantum.pair import pair_exact


def test_noise_covariance_reproduced():
    t = np.linspace(0, 2, 21)
    ker = NoiseKernel("X", t, 2.0 * np.exp(-t**2))
    x = sample_noise(ker, 40_000, 1)
    emp = x.T @ x / x.shape[0]
    np.testing.assert_allclose(emp, ker.covariance(), atol=0.08)


def test_zero_kernel_gives_zero_noise():
    t = np.linspace(0, 1, 5)
    assert not np.any(sample_noise(NoiseKernel("Z", t, np.zeros(5)), 3))


def test_indefinite_kernel_detected():
    t = np.linspace(0, 1, 5)
    bad = NoiseKernel("X", t, np.array([1.0, -1.0, 1.0, -1.0, 3.0]))
    with pytest.raises(NumericalError):
        sample_noise(bad, 3)
    assert sample_noise(bad, 3, clip=True).shape == (3, 5)


def test_nonuniform_kernel_grid_rejected():
    with pytest.raises(InputError):
        NoiseKernel("X", np.array([0, 0.1, 0.3]), np.ones(3))


def test_static_field_precession():
    t = np.linspace(0, 3, 31)
    bz = np.full((1, t.size), 2.0)
    frames = impurity_evolve(np.zeros_like(bz), np.zeros_like(bz), bz, t)
    mean, _ = frame_autocorrelators(frames)
    np.testing.assert_allclose(mean[0], np.cos(2 * t), atol=1e-12)
    np.testing.assert_allclose(mean[2], 1.0, atol=1e-12)


def test_fine_grid_contains_output():
    fine, stride = fine_grid(np.linspace(0, 1, 11))
    assert stride == 10
    np.testing.assert_allclose(fine[::stride], np.linspace(0, 1, 11))
    with pytest.raises(InputError):
        fine_grid(np.array([0, 0.1, 0.3]))


def test_l2_distance():
    t = np.linspace(0, 1, 101)
    assert l2_distance(np.ones(101), np.zeros(101), t) == pytest.approx(1.0)


def test_zero_coupling_converges_immediately():
    c = CouplingMatrix(np.zeros((4, 4)))
    res = dmft_solve(c, ISING, np.linspace(0, 1, 11), n_noise=16)
    assert res.iterations == 1
    np.testing.assert_array_equal(res.values, 1.0)


def test_ising_dmft_is_gaussian_fixed_point(dipolar):
    c = dipolar(6, seed=1, r_min=0.5)
    t = np.linspace(0, 1, 11)
    res = dmft_solve(c, ISING, t, n_noise=4000, seed=3)
    np.testing.assert_array_equal(res.values[2], 1.0)
    s2 = 0.25 * c.sum_sq_per_site()
    exact = np.exp(-0.5 * s2[:, None] * t[None] ** 2)
    z = (res.values[0] - exact) / np.maximum(res.stderr[0], 1e-12)
    assert np.sqrt(np.mean(z[:, 1:] ** 2)) < 2.5


def test_nonconvergence_reports_distances(dipolar):
    with pytest.raises(ConvergenceError) as info:
        dmft_solve(dipolar(4), ISING, np.linspace(0, 1, 6), n_noise=32, tol=1e-12, max_iter=2)
    assert len(info.value.distances) == 2


def test_dmft_threads_independent(dipolar):
    c = dipolar(5, seed=2, r_min=0.5)
    t = np.linspace(0, 0.5, 6)
    g = parameterize_lambda(0.3)
    a = dmft_solve(c, g, t, n_noise=64, threads=1)
    b = dmft_solve(c, g, t, n_noise=64, threads=4)
    np.testing.assert_array_equal(a.values, b.values)


def test_cluster_partition():
    J = np.zeros((5, 5))
    for i, j, v in [(0, 3, 2.0), (3, 4, -2.5), (1, 2, 0.5)]:
        J[i, j] = J[j, i] = v
    part = cluster_partition(CouplingMatrix(J), 1.75)
    assert part.clusters == ((0, 3, 4), (1,), (2,))
    assert part.cluster_of(4) == (0, 3, 4)
    assert part.sizes == [3, 1, 1]


def test_isolated_pair_cluster_is_exact(pair_couplings):
    t = np.linspace(0, 4, 21)
    g = AnisotropyVector(0.3, 0.9, -0.6)
    res = cdmft_solve(pair_couplings(1.3), g, t, j0_cluster=1.0, n_noise=2)
    for mu, axis in enumerate("XYZ"):
        np.testing.assert_allclose(res.values[mu, 0], pair_exact(g, 1.3, axis, t), atol=1e-10)


def test_oversized_cluster_rejected():
    J = np.full((9, 9), 3.0)
    np.fill_diagonal(J, 0)
    with pytest.raises(ResourceError):
        cdmft_solve(CouplingMatrix(J), ISING, np.linspace(0, 1, 3), n_noise=2)
