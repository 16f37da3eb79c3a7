import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from dxl.analysis.disorder_order import forward_map, recombine_disorder_order
from dxl.analysis.fitting import fit_stretched_exponential
from dxl.analysis.rescale import rescale_fit
from dxl.model import parameterize_lambda, parameterize_theta
from dxl.traces import CorrelatorTrace

finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(st.floats(-20, 20, allow_nan=False))
def test_theta_antiperiodic(theta):
    g1 = parameterize_theta(theta).as_array()
    g2 = parameterize_theta(theta + math.pi).as_array()
    assert np.allclose(g2, -g1, atol=1e-12)


@given(st.floats(-5, 5, allow_nan=False))
def test_lambda_formula(lam):
    g = parameterize_lambda(lam).as_tuple()
    assert g[0] == g[1] == (1 + lam) / 3 and g[2] == (1 - 2 * lam) / 3


@given(st.lists(st.tuples(finite, finite, finite), min_size=1, max_size=8))
def test_recombination_round_trip(rows):
    v = np.array(rows).T
    t = np.arange(v.shape[1], dtype=float)
    axes = [CorrelatorTrace(a, t, v[k]) for k, a in enumerate("XYZ")]
    back = recombine_disorder_order(*forward_map(*axes))
    for a, b in zip(axes, back):
        assert np.allclose(a.values, b.values, rtol=0, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.5, 2.5), st.floats(0.1, 10.0))
def test_fit_recovers_and_rescales(tau, nu, s):
    t = np.linspace(0, 3 * tau, 60)
    c = np.exp(-((t / tau) ** nu))
    f = fit_stretched_exponential((t, c))
    g = fit_stretched_exponential((s * t, c))
    assert math.isclose(f.tau, tau, rel_tol=1e-6) and math.isclose(f.nu, nu, rel_tol=1e-6)
    assert math.isclose(g.tau, s * f.tau, rel_tol=1e-9) and math.isclose(g.nu, f.nu, rel_tol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.1, 10.0), min_size=1, max_size=6), st.floats(0.05, 20.0))
def test_rescale_reciprocity(taus, r):
    a = [(x, 0.1) for x in taus]
    b = [(r * x, 0.1) for x in taus]
    assert math.isclose(rescale_fit(a, b).r * rescale_fit(b, a).r, 1.0, rel_tol=1e-6)
