"""Monte Carlo hot-loop kernels.

The compiled extension (`_core`, Cython) is used when importable; the numpy
twin (`_pure`) otherwise. Set MDLVOL_PURE=1 to force the fallback. Both
backends implement the same signatures and agree to numerical tolerance
(not bitwise: they factor the per-draw metrics differently).
"""

import os

from . import _pure

if os.environ.get("MDLVOL_PURE", "").strip() not in ("", "0"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

capacity_half_logdet = _impl.capacity_half_logdet
lattice_draw_stats = _impl.lattice_draw_stats


def backends() -> dict:
    """Importable backend modules by name (for tests and benchmarks)."""
    found = {"pure": _pure}
    try:
        from . import _core

        found["cython"] = _core
    except ImportError:
        pass
    return found
