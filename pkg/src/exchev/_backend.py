"""Kernel backend selection.

The compiled extension is used when importable; set ``EXCHEV_BACKEND=python``
to force the pure-Python reference kernels.
"""
import os

from . import _kernels_py

_requested = os.environ.get("EXCHEV_BACKEND", "auto").lower()

if _requested == "python":
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        kernels = _kernels_py
        BACKEND = "python"

AVAILABLE = {"python": _kernels_py}
if BACKEND == "cython":
    AVAILABLE["cython"] = kernels
else:
    try:
        from . import _kernels as _compiled
        AVAILABLE["cython"] = _compiled
    except ImportError:
        pass


def get_kernels(name=None):
    """Return the kernel module `name` (``"python"``/``"cython"``) or the default."""
    if name is None:
        return kernels
    try:
        return AVAILABLE[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available") from None
