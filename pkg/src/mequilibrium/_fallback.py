"""Pure numpy implementations of the kernels; selected when the compiled
module is unavailable or MEQ_PURE_PYTHON is set."""
from __future__ import annotations

import numpy as np


def lloyd(points: np.ndarray, init: np.ndarray, max_iter: int = 300):
    points = np.ascontiguousarray(points, dtype=float)
    cent = np.array(init, dtype=float, copy=True)
    n, k = len(points), len(cent)
    labels = np.full(n, -1, dtype=np.int64)
    history = []
    for it in range(max_iter):
        d2 = ((points[:, None, :] - cent[None, :, :]) ** 2).sum(axis=2)
        new = d2.argmin(axis=1)
        mind = d2[np.arange(n), new]
        history.append(float(mind.sum()))
        changed = bool(np.any(new != labels))
        labels = new
        if not changed and it > 0:
            break
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(cent)
        np.add.at(sums, labels, points)
        for c in range(k):
            if counts[c] > 0:
                cent[c] = sums[c] / counts[c]
            else:
                far = int(np.argmax(mind))
                cent[c] = points[far]
                mind[far] = 0.0
                labels[far] = c
    err = float(((points - cent[labels]) ** 2).sum())
    return cent, labels, err, np.array(history)


def order_codes(values: np.ndarray, eps: float) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    n, m = values.shape
    order = np.argsort(values, axis=1, kind="stable")
    a = values[:, :, None]
    b = values[:, None, :]
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    close = np.abs(a - b) <= eps * scale
    close[:, np.arange(m), np.arange(m)] = False
    tie = close.any(axis=(1, 2))
    code = np.zeros(n, dtype=np.int64)
    for p in range(m):
        smaller = (order[:, p + 1:] < order[:, p:p + 1]).sum(axis=1)
        code = code * (m - p) + smaller
    code[tie] = -1
    return code
