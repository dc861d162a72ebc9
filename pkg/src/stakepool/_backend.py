"""Kernel selection at import.

The compiled extension is used when importable; set ``STAKEPOOL_PURE_PYTHON=1``
to force the pure-Python kernels.
"""
import os
import warnings

if os.environ.get("STAKEPOOL_PURE_PYTHON"):
    from . import _kernels_py as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError as exc:  # extension not built
        warnings.warn(f"stakepool: compiled kernels unavailable ({exc}); "
                      "using the pure-Python fallback", RuntimeWarning, stacklevel=2)
        from . import _kernels_py as kernels
        BACKEND = "python"

__all__ = ["BACKEND", "kernels"]
