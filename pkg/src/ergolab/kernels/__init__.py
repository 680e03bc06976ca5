"""Hot loops, compiled when the Cython extension is built.

Set ``ERGOLAB_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

try:
    if os.environ.get("ERGOLAB_PURE_PYTHON"):
        raise ImportError("pure python requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

IMPLEMENTATIONS = {"python": _pykernels}
if BACKEND == "cython":
    IMPLEMENTATIONS["cython"] = _impl

lattice_return_counts = _impl.lattice_return_counts
lattice_excursions = _impl.lattice_excursions
odometer_square = _impl.odometer_square
