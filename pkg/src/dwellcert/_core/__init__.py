"""Hot kernels for the LP solver: compiled extension when available,
numpy fallback otherwise.

Set DWELLCERT_PURE_PYTHON=1 to force the fallback (used by the kernel
benchmark and the equivalence tests).
"""

import os

from dwellcert._core import _pykernels

if os.environ.get("DWELLCERT_PURE_PYTHON") == "1":
    _impl = _pykernels
    KERNEL_BACKEND = "python"
else:
    try:
        from dwellcert._core import _ckernels as _impl
        KERNEL_BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels
        KERNEL_BACKEND = "python"

ftran_etas = _impl.ftran_etas
btran_etas = _impl.btran_etas
harris_ratio = _impl.harris_ratio

__all__ = ["ftran_etas", "btran_etas", "harris_ratio", "KERNEL_BACKEND",
           "_pykernels"]
