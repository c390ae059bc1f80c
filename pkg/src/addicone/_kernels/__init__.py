"""Hot kernels, compiled when the extension is built, numpy otherwise.

Set ``ADDICONE_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _fallback

try:
    if os.environ.get("ADDICONE_PURE_PYTHON"):
        raise ImportError("pure-python backend requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _fallback
    BACKEND = "python"

subset_entropies = _impl.subset_entropies

__all__ = ["BACKEND", "subset_entropies"]
