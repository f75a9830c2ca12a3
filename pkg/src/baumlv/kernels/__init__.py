"""Model-checking kernels: the compiled extension when it is built, numpy otherwise.

Set BAUMLV_PURE_PYTHON=1 to force the fallback.
"""

import os

from . import _fallback

BACKEND = "python"
if os.environ.get("BAUMLV_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
else:
    _impl = _fallback

pre_exists = _impl.pre_exists
pre_forall = _impl.pre_forall
reachable = _impl.reachable

__all__ = ["BACKEND", "pre_exists", "pre_forall", "reachable"]
