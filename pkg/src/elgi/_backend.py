"""Pick the compiled sampling kernels when built, else the pure-Python ones.

Set ``ELGI_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("ELGI_PURE_PYTHON", "") not in ("", "0"):
    from . import _fallback as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels

        BACKEND = "cython"
    except ImportError:
        from . import _fallback as kernels

        BACKEND = "python"

uniform_doubles = kernels.uniform_doubles
multinomial_counts = kernels.multinomial_counts
