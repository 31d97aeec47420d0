"""Search kernels: compiled backend when built, pure Python otherwise.

Set KGEXPLORE_PURE_PYTHON=1 to force the fallback (used by the benchmark
and the backend-equivalence tests).
"""

import os

from . import _pypaths

if os.environ.get("KGEXPLORE_PURE_PYTHON"):
    _impl = _pypaths
    BACKEND = "python"
else:
    try:
        from . import _cpaths as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pypaths
        BACKEND = "python"

bfs_distances = _impl.bfs_distances
enumerate_gold_paths = _impl.enumerate_gold_paths

__all__ = ["BACKEND", "bfs_distances", "enumerate_gold_paths"]
