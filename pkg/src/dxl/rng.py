"""Counter-based random streams keyed by (master seed, purpose, indices).

Every stochastic quantity in the package draws from its own Philox stream so
that results never depend on execution order or on the number of workers.
"""

from enum import IntEnum

import numpy as np


class Purpose(IntEnum):
    GEOMETRY = 1
    SY_COUPLINGS = 2
    HAAR = 3
    DTWA = 4
    DMFT_NOISE = 5
    CDMFT_NOISE = 6
    DISORDER = 7
    PAIR = 8
    SYNTHETIC = 9
    CALIBRATION = 10
    CDMFT_HAAR = 11


def stream(seed, purpose, *indices):
    """Return an independent generator for ``(seed, purpose, *indices)``."""
    key = (int(purpose),) + tuple(int(i) for i in indices)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
