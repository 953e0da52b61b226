"""Select the compiled kernels when available, numpy otherwise.

Set ``PSHLAB_PURE_PYTHON=1`` to force the numpy fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
kernels = _pykernels

if os.environ.get("PSHLAB_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as kernels  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        kernels = _pykernels

green_disc = kernels.green_disc
green_annulus = kernels.green_annulus
edge_fraction_area = kernels.edge_fraction_area
