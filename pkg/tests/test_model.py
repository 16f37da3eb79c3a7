import math

import numpy as np
import pytest

from dxl.errors import DegenerateGeometryError, InputError
from dxl.model import (AnisotropyVector, DipolarModel, EnsembleGeometry, axis_index,
                       coupling_matrix, parameterize_lambda, parameterize_theta,
                       sample_positions, sample_sy_couplings)


def test_lambda_landmarks():
    assert parameterize_lambda(-1).as_tuple() == pytest.approx((0, 0, 1))
    assert parameterize_lambda(0).as_tuple() == pytest.approx((1 / 3, 1 / 3, 1 / 3))
    assert parameterize_lambda(0.5).as_tuple() == pytest.approx((0.5, 0.5, 0))


@pytest.mark.parametrize("theta", [-1.3, -0.2, 0.3, 1.1, 2.5])
def test_theta_is_antiperiodic(theta):
    g1 = parameterize_theta(theta).as_array()
    g2 = parameterize_theta(theta + math.pi).as_array()
    np.testing.assert_allclose(g2, -g1, atol=1e-12)


def test_theta_landmarks():
    ising = parameterize_theta(-math.pi / 4).as_array()
    assert ising[:2] == pytest.approx([0, 0], abs=1e-12) and ising[2] > 0
    heis = parameterize_theta(0.0).as_array()
    assert heis == pytest.approx([heis[0]] * 3)
    xy = parameterize_theta(math.pi / 4).as_array()
    assert xy[2] == pytest.approx(0, abs=1e-12)
    dip = parameterize_theta(math.pi / 2).as_array()
    # the equally spaced landmark after XY; in-plane and axial weights of opposite sign
    assert dip[2] / dip[0] == pytest.approx(-1.0)


def test_nonfinite_parameters_rejected():
    with pytest.raises(InputError):
        parameterize_lambda(float("nan"))
    with pytest.raises(InputError):
        AnisotropyVector(0, float("inf"), 1)


def test_axis_index_accepts_names_and_ints():
    assert axis_index("x") == 0 and axis_index("Z") == 2 and axis_index(1) == 1
    with pytest.raises(InputError):
        axis_index("W")


def test_positions_in_box_and_deterministic():
    a = sample_positions(30, seed=4, index=2)
    b = sample_positions(30, seed=4, index=2)
    np.testing.assert_array_equal(a.positions, b.positions)
    assert np.all(a.positions >= 0) and np.all(a.positions < a.box_length)
    assert a.box_length == pytest.approx(30 ** (1 / 3))
    c = sample_positions(30, seed=4, index=3)
    assert not np.array_equal(a.positions, c.positions)


def test_coupling_matrix_properties(dipolar):
    J = dipolar(12, seed=1).values
    np.testing.assert_array_equal(J, J.T)
    assert np.all(np.diag(J) == 0)
    assert not J.flags.writeable


def test_coupling_along_axis_and_equator():
    geom = EnsembleGeometry(np.array([[0, 0, 0], [0, 0, 1.0], [1.0, 0, 0]]), math.inf)
    J = coupling_matrix(geom).values
    assert J[0, 1] == pytest.approx(2.0)  # along the quantization axis
    assert J[0, 2] == pytest.approx(-1.0)  # in the equatorial plane


def test_hard_core_distance_respected():
    model = DipolarModel(r_min=0.4)
    geom = sample_positions(40, model, seed=0)
    d = geom.positions[:, None] - geom.positions[None]
    d -= geom.box_length * np.round(d / geom.box_length)
    r = np.sqrt((d**2).sum(-1)) + np.eye(40) * 10
    assert r.min() >= 0.4


def test_coincident_spins_rejected():
    geom = EnsembleGeometry(np.zeros((2, 3)), math.inf)
    with pytest.raises(DegenerateGeometryError):
        coupling_matrix(geom)


def test_sy_couplings_variance():
    n = 400
    J = sample_sy_couplings(n, seed=3).values
    iu = np.triu_indices(n, 1)
    assert np.var(J[iu]) == pytest.approx(2.0 / n, rel=0.02)
    np.testing.assert_array_equal(J, J.T)


def test_geometry_csv_round_trip(tmp_path):
    g = sample_positions(5, seed=2)
    p = tmp_path / "geom.csv"
    g.to_csv(p)
    back = EnsembleGeometry.from_csv(p)
    np.testing.assert_array_equal(back.positions, g.positions)
