"""Level-set edge openings and cluster statistics.

An edge ``{x, y}`` carries a unit-length Brownian bridge between the field
values at its endpoints; the edge is open at level ``h`` exactly when that
bridge stays at or above ``h``, which integrates out to the closed form

    P[open] = 1 - exp(-2 (phi_x - h)_+ (phi_y - h)_+),

independently across edges given the field.  ``bridge_min_oracle`` checks the
closed form by simulating the bridges directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from . import rng as _rng
from .errors import DimensionMismatch, PreconditionError
from .field import FieldSample
from .graphs import Graph

__all__ = [
    "OpenEdgeSet",
    "ClusterStats",
    "open_probability",
    "percolate",
    "percolate_levels",
    "clusters",
    "clusters_to_csv",
    "bridge_min_oracle",
    "bridge_survival_frequency",
]

#: Runs per random-buffer block in the bridge frequency estimator.  Fixed so
#: that results are independent of memory layout choices.
BRIDGE_CHUNK = 4096


@dataclass(frozen=True)
class OpenEdgeSet:
    """Open-edge indicator over the canonical edge order at one level.

    Attributes
    ----------
    h : float
        The level.
    open : numpy.ndarray
        Boolean mask over canonical edge indices.
    seed : int
        Seed of the per-edge uniform stream.
    """

    h: float
    open: np.ndarray
    seed: int


@dataclass(frozen=True)
class ClusterStats:
    """Connected-component census of an open-edge subgraph.

    Attributes
    ----------
    sizes : numpy.ndarray
        Cluster vertex-counts, sorted descending.
    cmax : int
        Largest cluster size.
    cmax_root : int
        Smallest vertex index inside a maximum cluster (ties between maximum
        clusters are broken toward the cluster containing the smallest
        vertex).
    second_cmax : int | None
        Second-largest cluster size; ``None`` when there is a single cluster.
    num_clusters : int
        Number of clusters, singletons included.
    """

    sizes: np.ndarray
    cmax: int
    cmax_root: int
    second_cmax: int | None
    num_clusters: int


def open_probability(a: float, b: float, h: float) -> float:
    """Probability that the edge bridge from ``a`` to ``b`` stays above ``h``."""
    return float(1.0 - math.exp(-2.0 * max(a - h, 0.0) * max(b - h, 0.0)))


def _open_probability_array(pu: np.ndarray, pv: np.ndarray, h: float) -> np.ndarray:
    return 1.0 - np.exp(-2.0 * np.maximum(pu - h, 0.0) * np.maximum(pv - h, 0.0))


def percolate_levels(g: Graph, f: FieldSample, levels, seed: int) -> list[OpenEdgeSet]:
    """Open-edge sets at several levels sharing one per-edge uniform stream.

    The single stream gives the monotone coupling: whenever ``h1 <= h2`` the
    open set at ``h2`` is contained in the open set at ``h1``.
    """
    if f.phi.shape != (g.n,):
        raise DimensionMismatch("field sampled on a different graph")
    uniforms = _rng.generator(seed).random(g.m)
    pu = f.phi[g.edges[:, 0]]
    pv = f.phi[g.edges[:, 1]]
    out = []
    for h in levels:
        probs = _open_probability_array(pu, pv, float(h))
        out.append(OpenEdgeSet(h=float(h), open=uniforms < probs, seed=int(seed)))
    return out


def percolate(g: Graph, f: FieldSample, h: float, seed: int) -> OpenEdgeSet:
    """Open each edge independently given the field at level ``h``."""
    return percolate_levels(g, f, [h], seed)[0]


def clusters(g: Graph, o: OpenEdgeSet) -> ClusterStats:
    """Connected components of the open subgraph via union-find."""
    if o.open.shape != (g.m,):
        raise DimensionMismatch("open mask built on a different graph")
    labels = kernels.cluster_labels(
        g.n,
        np.ascontiguousarray(g.edges[:, 0]),
        np.ascontiguousarray(g.edges[:, 1]),
        np.ascontiguousarray(o.open, dtype=np.uint8),
    )
    counts = np.bincount(labels, minlength=g.n)
    roots = np.flatnonzero(counts)
    sizes = np.sort(counts[roots])[::-1].astype(np.int64)
    cmax = int(sizes[0])
    cmax_root = int(np.flatnonzero(counts[labels] == cmax)[0])
    second = int(sizes[1]) if sizes.size > 1 else None
    return ClusterStats(
        sizes=sizes,
        cmax=cmax,
        cmax_root=cmax_root,
        second_cmax=second,
        num_clusters=int(roots.size),
    )


def clusters_to_csv(g: Graph, o: OpenEdgeSet) -> str:
    """Render per-vertex cluster ids as ``vertex,cluster_id`` CSV.

    Ids are union-find roots relabeled to dense 0-based ids in order of first
    appearance along the vertex order.
    """
    labels = kernels.cluster_labels(
        g.n,
        np.ascontiguousarray(g.edges[:, 0]),
        np.ascontiguousarray(g.edges[:, 1]),
        np.ascontiguousarray(o.open, dtype=np.uint8),
    )
    uniq, first_pos, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(uniq.size, dtype=np.int64)
    rank[np.argsort(first_pos)] = np.arange(uniq.size)
    dense = rank[inverse]
    lines = ["vertex,cluster_id"]
    lines.extend("%d,%d" % (v, c) for v, c in enumerate(dense))
    return "\n".join(lines) + "\n"


def _bridge_block(gen: np.random.Generator, count: int, steps: int,
                  a: float, b: float, h: float, exact_min: bool) -> np.ndarray:
    normals = gen.standard_normal((count, steps))
    unif = gen.random(count)
    return kernels.bridge_survival(normals, unif, a, b, h, exact_min)


def bridge_min_oracle(a: float, b: float, h: float, steps: int, seed: int,
                      exact_min: bool = True) -> bool:
    """Simulate one discretized Brownian bridge and report level survival.

    The bridge runs from ``a`` to ``b`` over length 1 with variance parameter
    1, discretized in ``steps`` increments.  With ``exact_min=True`` (the
    default) the indicator is exact for the continuum minimum: given the grid
    values, each sub-interval dips below ``h`` with probability
    ``exp(-2 steps u v)`` for endpoint clearances ``u, v``, and one uniform
    per run thins the survivors accordingly.  With ``exact_min=False`` only
    the grid minimum is checked, which overshoots the survival probability
    by O(1/sqrt(steps)) near the level.
    """
    if steps < 2:
        raise PreconditionError("steps must be >= 2")
    gen = _rng.generator(seed)
    ok = _bridge_block(gen, 1, steps, float(a), float(b), float(h), exact_min)
    return bool(ok[0])


def bridge_survival_frequency(a: float, b: float, h: float, steps: int,
                              runs: int, seed: int,
                              exact_min: bool = True) -> float:
    """Empirical survival frequency over ``runs`` simulated bridges.

    One generator seeded by ``seed`` supplies, per block of ``BRIDGE_CHUNK``
    runs, first the normal increments and then the thinning uniforms, so the
    result depends only on ``(a, b, h, steps, runs, seed, exact_min)``.
    """
    if steps < 2:
        raise PreconditionError("steps must be >= 2")
    if runs < 1:
        raise PreconditionError("runs must be >= 1")
    gen = _rng.generator(seed)
    hits = 0
    left = runs
    while left > 0:
        count = min(left, BRIDGE_CHUNK)
        hits += int(_bridge_block(gen, count, steps, float(a), float(b),
                                  float(h), exact_min).sum())
        left -= count
    return hits / runs
