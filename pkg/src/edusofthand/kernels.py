"""Kernel backend selection.

The compiled ``_kernels`` extension is used when importable; otherwise, or
when ``EDUSOFTHAND_PURE=1``, the pure-Python twins in ``_kernels_py`` are
used. Both produce identical results up to floating-point rounding.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("EDUSOFTHAND_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

chain_frames = _impl.chain_frames
transform_points = _impl.transform_points
route_geometry = _impl.route_geometry
point_segment = _impl.point_segment
segment_segment = _impl.segment_segment

__all__ = [
    "BACKEND",
    "chain_frames",
    "transform_points",
    "route_geometry",
    "point_segment",
    "segment_segment",
]
