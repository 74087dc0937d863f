"""Kernel backend selection.

The compiled Cython backend is used when its extension module imports
cleanly; otherwise the pure-numpy fallback takes over.  Set
MESHLIFT_KERNEL=numpy or MESHLIFT_KERNEL=cython to force a choice
(forcing cython raises if the extension is missing).
"""

import os

from . import _raster_np

_forced = os.environ.get("MESHLIFT_KERNEL", "").strip().lower()

_cy = None
if _forced != "numpy":
    try:
        from . import _raster_cy as _cy
    except ImportError:
        _cy = None
        if _forced == "cython":
            raise ImportError(
                "MESHLIFT_KERNEL=cython but the compiled kernel is not built; "
                "reinstall with a C toolchain or unset MESHLIFT_KERNEL"
            )

_backend = _cy if _cy is not None else _raster_np

BACKEND = _backend.NAME
raster_forward = _backend.raster_forward
add_at_vec = _backend.add_at_vec


def available_backends():
    names = ["numpy"]
    try:
        from . import _raster_cy  # noqa: F401

        names.insert(0, "cython")
    except ImportError:
        pass
    return names
