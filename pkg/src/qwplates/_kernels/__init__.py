"""Walk-step kernel backend selection.

Imports the compiled Cython extension when available, otherwise the numpy
fallback.  Set ``QWPLATES_PURE_PYTHON=1`` to force the fallback (used by the
kernel benchmark and the cross-backend tests).
"""

import os

from . import _numpy as _fallback

if os.environ.get("QWPLATES_PURE_PYTHON"):
    _impl = _fallback
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _fallback

apply_coin = _impl.apply_coin
apply_shift = _impl.apply_shift


def backend_name() -> str:
    return _impl.BACKEND


__all__ = ["apply_coin", "apply_shift", "backend_name"]
