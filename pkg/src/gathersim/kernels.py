"""Backend selection for the hot geometry kernels.

The compiled extension is used when it imports; otherwise the pure-Python
twins take over. Set ``GATHERSIM_PURE=1`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("GATHERSIM_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

seh_center = _impl.seh_center
clamp_fraction = _impl.clamp_fraction
hull2d = _impl.hull2d
centered_chord = _impl.centered_chord
collision_min_dist = _impl.collision_min_dist

# pure-Python helpers with no compiled twin
crossing = _pykernels.crossing
collision_points_on = _pykernels.collision_points_on
