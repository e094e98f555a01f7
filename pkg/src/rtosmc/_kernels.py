"""Pick the compiled kernels when built, else the pure-Python fallback.

Set ``RTOSMC_PURE=1`` to force the fallback.
"""
import os

if os.environ.get("RTOSMC_PURE"):
    from ._fallback import digest64, scc_find_cycle
    BACKEND = "python"
else:
    try:
        from ._speedups import digest64, scc_find_cycle
        BACKEND = "cython"
    except ImportError:
        from ._fallback import digest64, scc_find_cycle
        BACKEND = "python"

__all__ = ["digest64", "scc_find_cycle", "BACKEND"]
