"""Pure-NumPy twins of the compiled kernels.

Each function consumes the same random buffers in the same floating-point
operation order as its compiled counterpart, so the two backends produce
identical outputs, not merely statistically equivalent ones.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def cluster_labels(n: int, eu: np.ndarray, ev: np.ndarray,
                   open_mask: np.ndarray) -> np.ndarray:
    """Union-find roots for the subgraph of the open edges (see _kernels)."""
    parent = np.arange(n, dtype=np.int32)
    size = np.ones(n, dtype=np.int32)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for k in np.flatnonzero(open_mask):
        ru = find(int(eu[k]))
        rv = find(int(ev[k]))
        if ru != rv:
            if size[ru] < size[rv]:
                ru, rv = rv, ru
            parent[rv] = ru
            size[ru] += size[rv]
    for i in range(n):
        parent[i] = find(i)
    return parent


def bridge_survival(normals: np.ndarray, unif: np.ndarray,
                    a: float, b: float, h: float, exact_min: bool) -> np.ndarray:
    """Survival indicators for Brownian bridges from ``a`` to ``b``.

    Vectorized twin of the compiled version; see that docstring for the
    sampling scheme.
    """
    runs, steps = normals.shape
    out = np.zeros(runs, dtype=np.uint8)
    if a < h or b < h:
        return out
    scale = math.sqrt(1.0 / steps)
    w_raw = np.cumsum(normals, axis=1)
    wn = w_raw[:, -1] * scale
    t = np.arange(1, steps + 1) / steps
    x = a + (b - a) * t + w_raw * scale - t * wn[:, None]
    u = x - h
    alive = u.min(axis=1) >= 0.0
    if not exact_min:
        out[alive] = 1
        return out
    prev = np.concatenate(
        [np.full((runs, 1), a - h), u[:, :-1]], axis=1
    )
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        terms = np.log1p(-np.exp(-2.0 * steps * prev * u))
        logsurv = np.cumsum(terms, axis=1)[:, -1]
        accept = np.log(unif) < logsurv
    out[alive & accept] = 1
    return out
