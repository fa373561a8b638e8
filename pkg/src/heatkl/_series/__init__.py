"""Series evaluation kernels with a compiled fast path.

Importing this package picks the Cython extension when it is available and
falls back to the NumPy implementation otherwise.  Set HEATKL_PURE_PYTHON=1
to force the fallback (useful for benchmarking and debugging).
"""

import os

if os.environ.get("HEATKL_PURE_PYTHON"):
    from ._fallback import gegenbauer_sum, wrapped_gaussian_sum

    BACKEND = "python"
else:
    try:
        from ._core import gegenbauer_sum, wrapped_gaussian_sum

        BACKEND = "cython"
    except ImportError:
        from ._fallback import gegenbauer_sum, wrapped_gaussian_sum

        BACKEND = "python"

__all__ = ["gegenbauer_sum", "wrapped_gaussian_sum", "BACKEND"]
