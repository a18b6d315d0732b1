"""Kernel backend selection.

Imports the compiled stepper kernels when the extension built, otherwise the
numpy fallback.  CASCADE_PROBE_FORCE_PYTHON=1 pins the fallback (used by the
agreement tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _kernels_np

if os.environ.get("CASCADE_PROBE_FORCE_PYTHON") == "1":
    _impl = _kernels_np
    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_np
        BACKEND = "python"

advect = _impl.advect
stage_shifted = _impl.stage_shifted
stage_offset = _impl.stage_offset
stage_far = _impl.stage_far
rk4_final = _impl.rk4_final

__all__ = [
    "BACKEND",
    "advect",
    "stage_shifted",
    "stage_offset",
    "stage_far",
    "rk4_final",
]
