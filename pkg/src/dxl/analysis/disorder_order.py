"""Disorder-order protocol: local autocorrelators from a global measurement.

Spins in the plane ``(a, b)`` are wound about the normal ``c`` by random
angles, evolved, unwound, and the in-plane magnetization along ``a`` is read
out.  Averaged over wide angle distributions this gives
``(C^aa + C^bb) / 2``; the three planes combine linearly into the three
axis autocorrelators.
"""

import math

import numpy as np

from ..errors import InputError
from ..model import AnisotropyVector, CouplingMatrix
from ..quantum.basis import spin_z
from ..quantum.hamiltonian import build_hamiltonian
from ..rng import Purpose, stream
from ..traces import CorrelatorTrace, check_grid

PLANES = {"XY": (0, 1, 2), "YZ": (1, 2, 0), "ZX": (2, 0, 1)}
DO_MAX_N = 10
CHUNK = 1000


def _same_grid(*traces):
    t = traces[0].times
    for tr in traces[1:]:
        if tr.times.shape != t.shape or np.any(tr.times != t):
            raise InputError("disorder-order traces must share one time grid")
    return t


def recombine_disorder_order(c_xy, c_yz, c_zx):
    """Plane signals -> (C^XX, C^YY, C^ZZ); stderr added in quadrature."""
    t = _same_grid(c_xy, c_yz, c_zx)
    v = np.array([c_xy.values, c_yz.values, c_zx.values])
    e2 = np.array([c_xy.stderr, c_yz.stderr, c_zx.stderr]) ** 2
    signs = np.array([[1, -1, 1], [1, 1, -1], [-1, 1, 1]], dtype=float)
    err = np.sqrt(np.abs(signs) @ e2)
    out = signs @ v
    return tuple(CorrelatorTrace(a, t, out[k], err[k], {"source": "disorder-order"})
                 for k, a in enumerate("XYZ"))


def forward_map(c_xx, c_yy, c_zz):
    """Axis autocorrelators -> ideal plane signals (XY, YZ, ZX)."""
    t = _same_grid(c_xx, c_yy, c_zz)
    v = np.array([c_xx.values, c_yy.values, c_zz.values])
    e2 = np.array([c_xx.stderr, c_yy.stderr, c_zz.stderr]) ** 2
    mix = 0.5 * np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], dtype=float)
    out = mix @ v
    err = np.sqrt((mix**2) @ e2)
    return tuple(CorrelatorTrace(p, t, out[k], err[k], {}) for k, p in enumerate(PLANES))


def _plane_hamiltonian(couplings, g, plane):
    """Dense H with axes relabelled so the plane becomes XY (a cyclic rotation)."""
    try:
        perm = PLANES[plane.upper()]
    except KeyError:
        raise InputError(f"unknown plane {plane!r}; use one of {sorted(PLANES)}") from None
    gp = AnisotropyVector(*(g.as_tuple()[k] for k in perm))
    h = build_hamiltonian(couplings, gp).to_dense()
    w, v = np.linalg.eigh(h)
    return w, v


def _signal(w, v, angles, t, n):
    """Protocol signal for each row of ``angles`` (S, n); returns (S, T)."""
    dim = 1 << n
    sz = spin_z(np.arange(dim), n)  # (dim, n)
    phase = np.exp(-1j * (angles @ sz.T))  # (S, dim): R_theta on the basis
    psi0 = phase.T / math.sqrt(dim)  # R_theta |+>^N, one column per sample
    coeff = v.conj().T @ psi0
    idx = np.arange(dim)
    out = np.empty((angles.shape[0], t.size))
    for k, tk in enumerate(t):
        psi = v @ (np.exp(-1j * w * tk)[:, None] * coeff)
        psi *= phase.T.conj()  # unwind
        acc = np.zeros(angles.shape[0])
        for i in range(n):
            acc += np.einsum("ds,ds->s", psi.conj(), psi[idx ^ (1 << i)]).real
        out[:, k] = acc / n
    return out


def _check(couplings):
    if not isinstance(couplings, CouplingMatrix):
        raise InputError("expected a CouplingMatrix")
    if couplings.n > DO_MAX_N:
        raise InputError(f"disorder-order emulation is limited to N <= {DO_MAX_N}")


def simulate_do_protocol(couplings, g, w_tau, plane, t_grid, n_disorder=10_000, seed=0, index=0):
    """Emulate the protocol with Gaussian winding angles of width ``w_tau``.

    Each sample draws ``theta_i ~ Normal(0, w_tau**2)``, prepares
    ``R_theta |+>^N``, evolves, applies ``R_theta^dag`` and records
    ``(2/N) <S^a>``.  Returns the sample mean with its standard error.
    Angles come from the stream keyed by ``(seed, index)``.
    """
    _check(couplings)
    if n_disorder < 1:
        raise InputError("n_disorder must be at least 1")
    if w_tau < 0:
        raise InputError("winding width must be non-negative")
    t = check_grid(t_grid)
    n = couplings.n
    w, v = _plane_hamiltonian(couplings, g, plane)
    rng = stream(seed, Purpose.DISORDER, index)
    s1 = np.zeros(t.size)
    s2 = np.zeros(t.size)
    done = 0
    while done < n_disorder:
        m = min(CHUNK, n_disorder - done)
        angles = rng.normal(0.0, w_tau, size=(m, n))
        sig = _signal(w, v, angles, t, n)
        s1 += sig.sum(axis=0)
        s2 += (sig**2).sum(axis=0)
        done += m
    mean = s1 / n_disorder
    if n_disorder > 1:
        var = np.maximum(s2 / n_disorder - mean**2, 0.0) * n_disorder / (n_disorder - 1)
        err = np.sqrt(var / n_disorder)
    else:
        err = np.zeros_like(mean)
    meta = {"solver": "do-protocol", "plane": plane.upper(), "w_tau": w_tau,
            "n_disorder": n_disorder, "seed": seed, "index": index, "n": n}
    return CorrelatorTrace(plane.upper(), t, mean, err, meta)


def do_protocol_uniform(couplings, g, plane, t_grid):
    """Protocol averaged over uniform angles, exactly.

    Per spin the signal is a trigonometric polynomial of degree two in its
    angle, so three equally spaced angles per spin integrate it exactly.
    Costs ``3**N`` evaluations.
    """
    _check(couplings)
    t = check_grid(t_grid)
    n = couplings.n
    w, v = _plane_hamiltonian(couplings, g, plane)
    nodes = 2.0 * math.pi * np.arange(3) / 3.0
    grid = np.array(np.meshgrid(*([nodes] * n), indexing="ij")).reshape(n, -1).T
    total = np.zeros(t.size)
    for start in range(0, grid.shape[0], CHUNK):
        total += _signal(w, v, grid[start:start + CHUNK], t, n).sum(axis=0)
    return CorrelatorTrace(plane.upper(), t, total / grid.shape[0], None,
                           {"solver": "do-protocol", "plane": plane.upper(), "angles": "uniform"})
