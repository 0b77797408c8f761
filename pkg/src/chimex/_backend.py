"""Pick the compiled kernels when available, the NumPy ones otherwise.

Set ``CHIMEX_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

AVAILABLE = {"python": _kernels_py}

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    AVAILABLE["cython"] = _compiled

if _compiled is not None and os.environ.get("CHIMEX_PURE_PYTHON", "") not in ("1", "true", "yes"):
    BACKEND = "cython"
    kernels = _compiled
else:
    BACKEND = "python"
    kernels = _kernels_py


def get(name=None):
    """Return the kernel module called ``name`` (default: the active one)."""
    if name is None:
        return kernels
    try:
        return AVAILABLE[name]
    except KeyError:
        raise ValueError(f"backend {name!r} is not available; have {sorted(AVAILABLE)}") from None
