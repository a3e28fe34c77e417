"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback is loaded. Set ``FOGCOLONY_PURE=1`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("FOGCOLONY_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

restricted_dist = _impl.restricted_dist
betweenness = _impl.betweenness
nondominated_ranks = _impl.nondominated_ranks
first_fit = _impl.first_fit

#: Both backends, for equivalence tests and the benchmark.
BACKENDS = {"python": _pykernels}
try:
    from . import _ckernels

    BACKENDS["cython"] = _ckernels
except ImportError:
    pass
