"""Stationary Gaussian noise with a prescribed covariance kernel."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from ..errors import InputError, NumericalError
from ..rng import Purpose, stream

JITTER = 1e-10
# eigenvalues below -PSD_TOL * D(0) are treated as a genuinely indefinite kernel
PSD_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class NoiseKernel:
    """``D(t_k) = <b(t) b(t + t_k)>`` on a uniform grid."""

    axis: str
    times: np.ndarray
    values: np.ndarray
    spin: int | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        d = np.asarray(self.values, dtype=float)
        if t.shape != d.shape or t.ndim != 1 or t.size == 0:
            raise InputError("kernel times and values must be matching 1-d arrays")
        if t.size > 2:
            step = np.diff(t)
            if np.max(np.abs(step - step[0])) > 1e-9 * max(1.0, abs(t[-1])):
                raise InputError("noise kernels need a uniform time grid")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", d)

    def covariance(self):
        return toeplitz(self.values)


def _factor(cov, d0, clip):
    """Lower factor L with L L^T ~= cov (jittered Cholesky, else eigen-factor)."""
    n = cov.shape[0]
    jittered = cov + JITTER * d0 * np.eye(n)
    try:
        return np.linalg.cholesky(jittered)
    except np.linalg.LinAlgError:
        pass
    w, v = np.linalg.eigh(cov)
    if w[0] < -PSD_TOL * d0 and not clip:
        raise NumericalError(
            f"noise kernel is not positive semidefinite: eigenvalue {w[0]:.3e} "
            f"(D(0) = {d0:.3e})"
        )
    # clip small negative modes; with clip=True this projects onto the PSD cone
    return v * np.sqrt(np.maximum(w, 0.0))


def sample_noise(kernel, count, seed=0, *indices, clip=False, purpose=Purpose.DMFT_NOISE):
    """Draw ``count`` realizations of zero-mean Gaussian noise, shape (count, T).

    The Toeplitz covariance is Cholesky-factorized with a ``1e-10 * D(0)``
    diagonal jitter.  A kernel that is indefinite beyond rounding raises
    NumericalError unless ``clip`` is set, in which case negative eigenmodes
    are dropped (used for Monte Carlo estimated kernels).
    """
    if count < 1:
        raise InputError("count must be at least 1")
    d0 = float(kernel.values[0])
    t = kernel.times.size
    if d0 < 0.0:
        if not clip:
            raise NumericalError(f"noise kernel has negative variance D(0) = {d0:.3e}")
        d0 = 0.0
    if d0 == 0.0 or not np.any(kernel.values):
        return np.zeros((count, t))
    L = _factor(kernel.covariance(), d0, clip)
    z = stream(seed, purpose, *indices).standard_normal((count, L.shape[1]))
    return z @ L.T
