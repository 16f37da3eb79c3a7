"""Correlator time series and their CSV representation."""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

CSV_HEADER = ("time_in_inv_J", "mean", "stderr")


def check_grid(t_grid):
    """Validate a time grid: finite, starting at 0, strictly increasing."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise InputError("time grid must be a non-empty 1-d array")
    if t[0] != 0.0:
        raise InputError("time grid must start at t = 0")
    if not np.all(np.isfinite(t)) or np.any(np.diff(t) <= 0):
        raise InputError("time grid must be finite and strictly increasing")
    return t


def uniform_grid(t_max, n_points):
    return np.linspace(0.0, float(t_max), int(n_points))


@dataclass
class CorrelatorTrace:
    axis: str
    times: np.ndarray
    values: np.ndarray
    stderr: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.stderr is None:
            self.stderr = np.zeros_like(self.values)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if not (self.times.shape == self.values.shape == self.stderr.shape):
            raise InputError("times, values and stderr must share one shape")

    def __len__(self):
        return self.times.size

    def to_csv(self, path):
        write_trace_csv(path, self.times, self.values, self.stderr)

    @classmethod
    def from_csv(cls, path, axis="?"):
        t, v, e = read_trace_csv(path)
        return cls(axis, t, v, e)


def _fmt(x):
    return repr(float(x))


def format_trace_csv(times, values, stderr):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in zip(times, values, stderr):
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def write_trace_csv(path, times, values, stderr):
    with open(path, "w", newline="") as fh:
        fh.write(format_trace_csv(times, values, stderr))


def read_trace_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != CSV_HEADER:
            raise InputError(f"{path}: expected header {','.join(CSV_HEADER)}")
        rows = [[float(x) for x in r] for r in reader if r]
    arr = np.array(rows, dtype=float).reshape(-1, 3)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def mean_and_stderr(samples, axis=0):
    """Sample mean and standard error along ``axis``.

    Sums are evaluated with numpy's pairwise summation over a fixed array
    layout, so the result does not depend on how the samples were produced.
    """
    x = np.asarray(samples, dtype=float)
    m = x.shape[axis]
    mean = np.mean(x, axis=axis)
    if m < 2:
        return mean, np.zeros_like(mean)
    std = np.std(x, axis=axis, ddof=1)
    return mean, std / math.sqrt(m)


def combine_traces(traces, axis=None):
    """Average independent traces on a common grid, propagating stderr."""
    if not traces:
        raise InputError("no traces to combine")
    t = traces[0].times
    for tr in traces[1:]:
        if tr.times.shape != t.shape or np.any(tr.times != t):
            raise InputError("traces must share one time grid")
    v = np.mean([tr.values for tr in traces], axis=0)
    e = np.sqrt(np.sum([tr.stderr**2 for tr in traces], axis=0)) / len(traces)
    return CorrelatorTrace(axis or traces[0].axis, t, v, e, dict(traces[0].metadata))
