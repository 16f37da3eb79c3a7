"""Hot-loop kernels with a compiled backend and a numpy fallback.

The compiled extension is used when it was built; setting the environment
variable ``DXL_PURE_PYTHON=1`` before import forces the numpy versions.
"""

import os

from . import _pykernels

if os.environ.get("DXL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

ising_site_products = _impl.ising_site_products
precess_frames = _impl.precess_frames
cluster_autocorrelators = _impl.cluster_autocorrelators
rotate_sites = _impl.rotate_sites

__all__ = ["BACKEND", "cluster_autocorrelators", "ising_site_products", "precess_frames", "rotate_sites"]
