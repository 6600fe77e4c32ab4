"""Kernel backend selection.

The compiled extension is used when it imports; setting
``TARGETSEARCH_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("TARGETSEARCH_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

scan_patterns = _impl.scan_patterns

__all__ = ["BACKEND", "scan_patterns"]
