"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; setting
STREAMVEC_PURE_PYTHON=1 forces the pure-Python kernels. Both backends
expose the same functions with the same semantics (see ``pure``).
"""

import os

if os.environ.get("STREAMVEC_PURE_PYTHON"):
    from streamvec._kernels import pure as impl

    BACKEND = "python"
else:
    try:
        from streamvec._kernels import _speedups as impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from streamvec._kernels import pure as impl  # type: ignore[no-redef]

        BACKEND = "python"

__all__ = ["impl", "BACKEND"]
