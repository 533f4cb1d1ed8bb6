"""Kernel dispatch: compiled extension when importable, numpy fallback otherwise."""
from __future__ import annotations

import os

import numpy as np

from . import _fallback

try:
    if os.environ.get("MEQ_PURE_PYTHON"):
        raise ImportError("pure-python kernels requested")
    from . import _ckernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "numpy"


def available_backends() -> list[str]:
    return ["numpy"] + (["compiled"] if _compiled is not None else [])


def _impl(backend: str | None):
    name = backend or BACKEND
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return _compiled
    if name != "numpy":
        raise ValueError(f"unknown kernel backend {name!r}")
    return _fallback


def lloyd(points, init, max_iter: int = 300, backend: str | None = None):
    """Lloyd's k-means iterations from initial centroids `init`.

    Returns (centroids, labels, total_error, error_history).  A cluster that
    empties is re-seeded at the point farthest from its centroid.
    """
    pts = np.ascontiguousarray(points, dtype=float)
    ini = np.ascontiguousarray(init, dtype=float)
    return _impl(backend).lloyd(pts, ini, int(max_iter))


def order_codes(values, eps: float, backend: str | None = None) -> np.ndarray:
    """Per row, the Lehmer code of the ascending order of its entries, or -1
    when any two entries tie under the scale-aware rule."""
    vals = np.ascontiguousarray(values, dtype=float)
    if vals.shape[1] > 16:
        raise ValueError("order codes support at most 16 entries")
    return _impl(backend).order_codes(vals, float(eps))


def ordering_from_code(code: int, m: int) -> tuple[int, ...]:
    """Inverse of the Lehmer coding: the ordering (lowest first) for `code`."""
    digits = []
    for base in range(1, m + 1):
        digits.append(code % base)
        code //= base
    digits.reverse()
    remaining = list(range(m))
    return tuple(remaining.pop(d) for d in digits)


def code_from_ordering(ordering) -> int:
    m = len(ordering)
    code = 0
    for p in range(m):
        smaller = sum(1 for q in range(p + 1, m) if ordering[q] < ordering[p])
        code = code * (m - p) + smaller
    return code
