"""Kernel backend selection.

The compiled ``_core`` extension is used when importable; setting
``TSCPLAN_PURE_PYTHON=1`` forces the numpy/Python fallback.
"""

import os

from . import _fallback

BACKEND = "python"
kernels = _fallback

if not os.environ.get("TSCPLAN_PURE_PYTHON"):
    try:
        from . import _core as kernels  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        kernels = _fallback

gi_solve = kernels.gi_solve
dilate = kernels.dilate
mark_aabbs = kernels.mark_aabbs
grow_box = kernels.grow_box
grid_search = kernels.grid_search

STATUS_OPTIMAL = _fallback.STATUS_OPTIMAL
STATUS_INFEASIBLE = _fallback.STATUS_INFEASIBLE
STATUS_MAX_ITER = _fallback.STATUS_MAX_ITER

__all__ = [
    "BACKEND",
    "gi_solve",
    "dilate",
    "mark_aabbs",
    "grow_box",
    "grid_search",
    "STATUS_OPTIMAL",
    "STATUS_INFEASIBLE",
    "STATUS_MAX_ITER",
]
