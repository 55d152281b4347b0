"""Backend selection for the recurrent-cell kernels.

The compiled extension is used when it imported successfully; setting the
environment variable ``FAIRTOX_PURE_PYTHON=1`` before import forces the
numpy fallback. Both backends implement the identical contract and agree to
floating-point rounding.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("FAIRTOX_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

lstm_pointwise_forward = _impl.lstm_pointwise_forward
lstm_pointwise_backward = _impl.lstm_pointwise_backward


def backend_name() -> str:
    return BACKEND
