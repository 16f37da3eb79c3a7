"""Physical conventions, anisotropy parameterizations and coupling matrices.

Units: lengths in the typical separation ``a``, energies in ``J = j0 / a**3``
and times in ``1/J``.  Spin operators are ``S = sigma / 2`` throughout.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError, InputError
from .rng import Purpose, stream

AXES = ("X", "Y", "Z")
AXIS_INDEX = {"X": 0, "Y": 1, "Z": 2}


def axis_index(axis):
    if isinstance(axis, (int, np.integer)):
        if 0 <= axis < 3:
            return int(axis)
    else:
        key = str(axis).upper()
        if key in AXIS_INDEX:
            return AXIS_INDEX[key]
    raise InputError(f"unknown spin axis {axis!r}")


@dataclass(frozen=True)
class AnisotropyVector:
    g_x: float
    g_y: float
    g_z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.g_x, self.g_y, self.g_z)):
            raise InputError(f"anisotropy components must be finite, got {self.as_tuple()}")

    def as_tuple(self):
        return (self.g_x, self.g_y, self.g_z)

    def as_array(self):
        return np.array(self.as_tuple(), dtype=float)

    @property
    def is_xxz(self):
        """True when the in-plane couplings coincide (U(1) symmetric)."""
        return self.g_x == self.g_y

    def __neg__(self):
        return AnisotropyVector(-self.g_x, -self.g_y, -self.g_z)

    def __str__(self):
        return "({:.6g}, {:.6g}, {:.6g})".format(*self.as_tuple())


ISING = AnisotropyVector(0.0, 0.0, 1.0)


def parameterize_lambda(lam):
    """Return ``((1 + lam) / 3, (1 + lam) / 3, (1 - 2 lam) / 3)``.

    ``lam = 0`` is the Heisenberg point, ``-1`` Ising and ``1/2`` XY.
    """
    lam = float(lam)
    if not math.isfinite(lam):
        raise InputError(f"lambda must be finite, got {lam}")
    inplane = (1.0 + lam) / 3.0
    return AnisotropyVector(inplane, inplane, (1.0 - 2.0 * lam) / 3.0)


def parameterize_theta(theta):
    """Periodic XXZ family: Ising, Heisenberg, XY and dipolar sit at
    ``theta = -pi/4, 0, pi/4, pi/2``; ``g(theta + pi) = -g(theta)``."""
    theta = float(theta)
    if not math.isfinite(theta):
        raise InputError(f"theta must be finite, got {theta}")
    phase = theta - math.pi / 4.0
    c = math.cos(phase)
    return AnisotropyVector(c, c, -math.sin(phase))


@dataclass(frozen=True)
class DipolarModel:
    j0: float = 1.0
    a: float = 1.0
    quantization_axis: tuple = (0.0, 0.0, 1.0)
    r_min: float | None = None

    def __post_init__(self):
        axis = np.asarray(self.quantization_axis, dtype=float)
        if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise InputError("quantization_axis must be a unit 3-vector")
        if not (self.a > 0 and math.isfinite(self.a)):
            raise InputError("a must be positive")
        if self.r_min is not None and not (0.0 < self.r_min < self.a):
            raise InputError(f"r_min must satisfy 0 < r_min < a, got {self.r_min}")

    @property
    def energy_unit(self):
        return self.j0 / self.a**3


@dataclass(frozen=True, eq=False)
class EnsembleGeometry:
    """Spin positions in a periodic cube (``box_length = inf`` disables wrapping)."""

    positions: np.ndarray
    box_length: float
    a: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise InputError("positions must have shape (N, 3)")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n(self):
        return self.positions.shape[0]

    def to_csv(self, path):
        """Write ``index,x,y,z`` rows in units of ``a``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "x", "y", "z"])
            for i, p in enumerate(self.positions / self.a):
                w.writerow([i] + [repr(float(v)) for v in p])

    @classmethod
    def from_csv(cls, path, box_length=None, a=1.0):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or set(rows[0]) != {"index", "x", "y", "z"}:
            raise InputError(f"{path}: expected header index,x,y,z")
        rows.sort(key=lambda r: int(r["index"]))
        pos = np.array([[float(r["x"]), float(r["y"]), float(r["z"])] for r in rows]) * a
        if box_length is None:
            box_length = len(rows) ** (1.0 / 3.0) * a
        return cls(pos, float(box_length), a)


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Symmetric zero-diagonal couplings in units of ``J``."""

    values: np.ndarray
    provenance: str = "dipolar-from-geometry"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InputError("coupling matrix must be square")
        if not np.array_equal(v, v.T) or np.any(np.diag(v) != 0):
            raise InputError("coupling matrix must be symmetric with zero diagonal")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    def sum_sq_per_site(self):
        """Per-site ``sum_j J_ij**2``."""
        return np.sum(self.values**2, axis=1)

    def submatrix(self, sites):
        idx = np.asarray(sites, dtype=int)
        return CouplingMatrix(self.values[np.ix_(idx, idx)], self.provenance)


def sample_positions(n, model=DipolarModel(), seed=0, index=0):
    """Uniform random positions in the periodic cube of side ``n**(1/3) a``.

    With ``model.r_min`` set, points are added sequentially and candidates
    closer than ``r_min`` (minimum image) to an accepted point are redrawn,
    i.e. a hard-core gas.  The stream is keyed by ``(seed, index)``.
    """
    n = int(n)
    if n < 1:
        raise InputError(f"need at least one spin, got N={n}")
    box = n ** (1.0 / 3.0) * model.a
    rng = stream(seed, Purpose.GEOMETRY, index)
    if model.r_min is None:
        pos = rng.uniform(0.0, box, size=(n, 3))
    else:
        pos = np.empty((n, 3))
        count = 0
        attempts = 0
        limit = 1000 * n
        while count < n:
            cand = rng.uniform(0.0, box, size=3)
            attempts += 1
            if attempts > limit:
                raise InputError(f"could not place {n} spins with r_min={model.r_min}")
            if count:
                d = pos[:count] - cand
                d -= box * np.round(d / box)
                if np.min(np.einsum("ij,ij->i", d, d)) < model.r_min**2:
                    continue
            pos[count] = cand
            count += 1
    # np.round can map values a hair below box to box
    pos = np.where(pos >= box, 0.0, pos)
    return EnsembleGeometry(pos, box, model.a, seed)


def minimum_image(geometry):
    """Pairwise separation vectors ``r_i - r_j`` under the minimum-image rule."""
    pos = geometry.positions
    d = pos[:, None, :] - pos[None, :, :]
    box = geometry.box_length
    if math.isfinite(box):
        d = d - box * np.round(d / box)
    return d


def coupling_matrix(geometry, model=DipolarModel()):
    """Dipolar couplings ``j0 (3 cos^2 theta - 1) / r**3`` in units of ``J``.

    Raises DegenerateGeometryError for coincident spins, or for a pair closer
    than ``model.r_min`` when a hard-core distance is set.
    """
    if abs(geometry.a - model.a) > 1e-12 * model.a:
        raise InputError("geometry and model use different length units a")
    n = geometry.n
    if n == 1:
        return CouplingMatrix(np.zeros((1, 1)))
    d = minimum_image(geometry)
    r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    np.fill_diagonal(r, np.inf)
    floor = 0.0 if model.r_min is None else model.r_min
    iu = np.triu_indices(n, 1)
    bad = np.nonzero(r[iu] <= floor if floor == 0.0 else r[iu] < floor)[0]
    if bad.size:
        k = bad[np.argmin(r[iu][bad])]
        raise DegenerateGeometryError(int(iu[0][k]), int(iu[1][k]), float(r[iu][k]))
    axis = np.asarray(model.quantization_axis, dtype=float)
    cos_t = (d @ axis) / r
    rho = r / model.a
    values = (3.0 * cos_t**2 - 1.0) / rho**3
    np.fill_diagonal(values, 0.0)
    values = 0.5 * (values + values.T)
    return CouplingMatrix(values, "dipolar-from-geometry")


def sample_sy_couplings(n, seed=0, index=0):
    """I.i.d. normal couplings with variance ``2 J**2 / N`` (anisotropic SY model)."""
    n = int(n)
    if n < 2:
        raise InputError(f"SY couplings need N >= 2, got {n}")
    rng = stream(seed, Purpose.SY_COUPLINGS, index)
    iu = np.triu_indices(n, 1)
    values = np.zeros((n, n))
    values[iu] = rng.normal(0.0, math.sqrt(2.0 / n), size=iu[0].size)
    values = values + values.T
    return CouplingMatrix(values, "sachdev-ye")
