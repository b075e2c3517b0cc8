"""Kernel backend selection.

Prefers the compiled Cython kernels when the extension built; falls back
to the numpy implementation otherwise. OPTILANG_PURE_PYTHON=1 forces the
fallback (used by the benchmark to compare both).
"""

from __future__ import annotations

import os

if os.environ.get("OPTILANG_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

KERNEL_BACKEND: str = kernels.BACKEND

__all__ = ["kernels", "KERNEL_BACKEND"]
