"""Kernel backend selection.

The compiled extension is preferred when present; the pure-NumPy twin is the
fallback.  Set ``GFFPERC_PURE_PY=1`` to force the fallback (used by the
benchmark and the backend-equivalence tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("GFFPERC_PURE_PY", "") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
cluster_labels = _impl.cluster_labels
bridge_survival = _impl.bridge_survival
