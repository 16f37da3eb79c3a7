"""Plot-ready coordinate transforms."""

import numpy as np

from ..traces import CorrelatorTrace


def triple_log_coordinates(trace):
    """``(ln t, ln(-ln C))`` pairs for points with ``t > 0`` and ``0 < C < 1``.

    Returns ``(points, skipped)`` where points has shape (K, 2).
    """
    if isinstance(trace, CorrelatorTrace):
        t, c = trace.times, trace.values
    else:
        t, c = (np.asarray(x, dtype=float) for x in trace)
    ok = (t > 0) & (c > 0) & (c < 1)
    pts = np.column_stack([np.log(t[ok]), np.log(-np.log(c[ok]))])
    return pts, int(t.size - np.count_nonzero(ok))
