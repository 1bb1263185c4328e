"""Select the split-scan kernel implementation at import.

The compiled extension is used when it was built; ``FS_PURE_PYTHON=1`` forces
the numpy fallback. Both expose ``scan_gini`` and ``scan_newton``.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _splitscan_py as python_kernels

compiled_kernels: ModuleType | None
try:
    from . import _splitscan as compiled_kernels  # type: ignore[attr-defined]
except ImportError:
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("FS_PURE_PYTHON") != "1":
    active: ModuleType = compiled_kernels
    BACKEND = "cython"
else:
    active = python_kernels
    BACKEND = "python"


def get(name: str | None = None) -> ModuleType:
    """Kernel module by name ("cython" / "python"), or the active one."""
    if name is None:
        return active
    if name == "python":
        return python_kernels
    if name == "cython":
        if compiled_kernels is None:
            raise ImportError("compiled split-scan kernel is not built")
        return compiled_kernels
    raise ValueError(f"unknown kernel backend {name!r}")
