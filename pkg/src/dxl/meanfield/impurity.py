"""Single spin precessing in classical Gaussian fields."""

import numpy as np

from ..errors import AccuracyError, InputError
from ..kernels import precess_frames

ORTHO_TOL = 1e-8


def impurity_evolve(b_x, b_y, b_z, t_grid):
    """Frames ``R(t)`` solving ``dR/dt = [b(t)]_x R`` with ``R(0) = 1``.

    Field arrays have shape (S, T) (or (T,)).  On each interval the field is
    held at the average of its endpoint values and the step is an exact
    rotation, so frames stay orthonormal to rounding.  Returns (S, T, 3, 3).
    """
    t = np.asarray(t_grid, dtype=float)
    fields = np.stack(np.broadcast_arrays(*(np.atleast_2d(b) for b in (b_x, b_y, b_z))), axis=-1)
    if fields.shape[1] != t.size:
        raise InputError("field samples and time grid disagree in length")
    frames = precess_frames(fields, np.diff(t))
    check_orthonormal(frames)
    return frames


def check_orthonormal(frames, tol=ORTHO_TOL):
    gram = np.einsum("...ki,...kj->...ij", frames, frames)
    dev = float(np.max(np.abs(gram - np.eye(3)))) if frames.size else 0.0
    if dev > tol:
        raise AccuracyError(f"frame orthonormality drift {dev:.2e} exceeds {tol:.0e}")
    return dev


def frame_autocorrelators(frames):
    """``(mean, stderr)`` of the diagonal frame elements, each (3, T)."""
    diag = np.einsum("stii->ist", frames)
    s = diag.shape[1]
    mean = diag.mean(axis=1)
    err = diag.std(axis=1, ddof=1) / np.sqrt(s) if s > 1 else np.zeros_like(mean)
    return mean, err
