"""Kernel dispatch: the compiled extension when importable, else the numpy fallback.

Set TROPSKEL_PURE_PYTHON=1 to force the fallback and TROPSKEL_NUM_THREADS to size the
compiled loops' thread pool.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_c = None
if os.environ.get("TROPSKEL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _c  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _c = None


def num_threads() -> int:
    try:
        return max(1, int(os.environ.get("TROPSKEL_NUM_THREADS", "1")))
    except ValueError:
        return 1


def laguerre_2d(Q, Y, h, backend: str | None = None):
    if (backend or BACKEND) == "cython" and _c is not None:
        return _c.laguerre_2d(Q, Y, h, num_threads())
    return _pykernels.laguerre_2d(Q, Y, h)


def torus_logabs(theta, E, coef, w, poly, npoly: int, backend: str | None = None):
    if (backend or BACKEND) == "cython" and _c is not None:
        return _c.torus_logabs(theta, E, coef, w, poly, npoly, num_threads())
    return _pykernels.torus_logabs(theta, E, coef, w, poly, npoly)


laguerre_polygons_2d = _pykernels.laguerre_polygons_2d

__all__ = ["BACKEND", "laguerre_2d", "torus_logabs", "laguerre_polygons_2d", "num_threads"]
