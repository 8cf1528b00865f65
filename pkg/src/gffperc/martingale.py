"""Set-indexed martingale of the field and the discrete exploration process.

Pairing the field against the equilibrium potential of a growing vertex set
yields a martingale whose quadratic variation is the capacity increment —
a "capacity clock".  The coefficients live on the current set: each vertex
carries the degree-weighted mass of walkers that first hit the set there,
scaled by the capacity multiplier.  The exploration grows the set through
the open cluster of a start vertex, jumping to the nearest unexplored vertex
when the cluster is exhausted, and records the martingale value and the
clock at every step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, PreconditionError, SolverFailure
from .field import FieldSample
from .graphs import Graph
from .percolation import OpenEdgeSet
from .potential import _vertex_set

__all__ = [
    "MartingaleCoefficients",
    "ExplorationStep",
    "ExplorationTrace",
    "martingale_coefficients",
    "evaluate_martingale",
    "level_bound_check",
    "explore",
    "time_change",
    "trace_to_csv",
]


@dataclass(frozen=True)
class MartingaleCoefficients:
    """Coefficient vector of the set-indexed martingale.

    Attributes
    ----------
    k_set : numpy.ndarray
        Sorted vertex set K.
    a : numpy.ndarray
        Length-n coefficients with martingale value ``a . phi``; supported
        on K and nonnegative, with total mass equal to ``cap``.
    a_blk : numpy.ndarray
        Bulk part ``nu * deg`` on K.
    a_bdr : numpy.ndarray
        Boundary part ``a - a_blk``, supported on vertices of K with a
        neighbor outside K.
    nu : float
        Capacity multiplier of K.
    cap : float
        ``two_m * nu``.
    """

    k_set: np.ndarray
    a: np.ndarray
    a_blk: np.ndarray
    a_bdr: np.ndarray
    nu: float
    cap: float


@dataclass(frozen=True)
class ExplorationStep:
    """One exploration step.

    ``added`` is the vertex joined at this step; ``cluster_step`` says the
    vertex arrived through an open frontier edge (as opposed to a jump);
    ``in_cluster`` says every step so far was a cluster step, i.e. the set
    is still contained in the closure of the start vertex's open cluster.
    ``q`` is the capacity clock (capacity increment since the start) and
    ``m``, ``m_blk``, ``m_bdr`` are the martingale value and its parts.
    """

    added: int
    cluster_step: bool
    in_cluster: bool
    q: float
    m: float
    m_blk: float
    m_bdr: float


@dataclass(frozen=True)
class ExplorationTrace:
    """Full record of one exploration run.

    Attributes
    ----------
    start : int
        Seed vertex of the exploration.
    level : float
        Level of the open-edge set explored.
    steps : tuple[ExplorationStep, ...]
        Step records; the explored set after step ``i`` is
        ``{steps[0].added, ..., steps[i].added}``.
    seed : int
        Seed of the open-edge uniform stream.
    """

    start: int
    level: float
    steps: tuple
    seed: int

    def k_at(self, i: int) -> np.ndarray:
        """The explored vertex set after step ``i``, sorted."""
        return np.sort(np.asarray([s.added for s in self.steps[: i + 1]],
                                  dtype=np.int64))


def _coefficients_on(lap: np.ndarray, deg: np.ndarray, two_m: int,
                     k_idx: np.ndarray, f_idx: np.ndarray):
    """Capacity multiplier and coefficient values on ``k_idx``.

    One SPD solve against the interior degrees gives both the Green sum
    (hence ``nu``) and, through the adjacency block, the hitting mass of
    every vertex of K.
    """
    d_f = deg[f_idx].astype(float)
    try:
        cho = scipy.linalg.cho_factor(lap[np.ix_(f_idx, f_idx)])
    except scipy.linalg.LinAlgError as exc:
        raise SolverFailure("killed Laplacian factorization failed") from exc
    s = scipy.linalg.cho_solve(cho, d_f)
    nu = two_m / float(d_f @ s)
    adj_kf = -lap[np.ix_(k_idx, f_idx)]
    hitmass = deg[k_idx].astype(float) + adj_kf @ s
    return nu, nu * hitmass


def martingale_coefficients(g: Graph, k) -> MartingaleCoefficients:
    """Coefficients of the martingale indexed by the vertex set ``k``.

    For ``x`` in K the coefficient is ``nu * sum_y deg[y] P_y[hit K at x]``;
    the bulk part is ``nu * deg[x]`` and the boundary part is the rest.
    """
    k_arr = _vertex_set(g, k)
    f_idx = np.setdiff1d(np.arange(g.n, dtype=np.int64), k_arr,
                         assume_unique=True)
    lap = g.laplacian()
    nu, a_on_k = _coefficients_on(lap, g.deg, g.two_m, k_arr, f_idx)
    a = np.zeros(g.n)
    a[k_arr] = a_on_k
    a_blk = np.zeros(g.n)
    a_blk[k_arr] = nu * g.deg[k_arr]
    return MartingaleCoefficients(
        k_set=k_arr, a=a, a_blk=a_blk, a_bdr=a - a_blk,
        nu=nu, cap=g.two_m * nu,
    )


def evaluate_martingale(c: MartingaleCoefficients,
                        f: FieldSample) -> tuple[float, float, float]:
    """Martingale value and its bulk/boundary parts on one field sample."""
    if f.phi.shape != c.a.shape:
        raise DimensionMismatch("field and coefficients have different lengths")
    m_blk = float(c.a_blk @ f.phi)
    m_bdr = float(c.a_bdr @ f.phi)
    return m_blk + m_bdr, m_blk, m_bdr


def level_bound_check(c: MartingaleCoefficients, f: FieldSample,
                      h: float) -> bool:
    """Check the level lower bound ``m >= h * cap``.

    When every vertex of K carries field value at least ``h`` the bound is
    forced, because the coefficients are nonnegative with total mass ``cap``;
    simulations assert this under that premise.
    """
    m, _, _ = evaluate_martingale(c, f)
    bound = h * c.cap
    return m >= bound - 1e-9 * (1.0 + abs(bound))


def _open_adjacency(g: Graph, o: OpenEdgeSet):
    """CSR-style adjacency (indptr, indices) of the open subgraph."""
    live = g.edges[o.open]
    ends = np.concatenate([live[:, 0], live[:, 1]])
    other = np.concatenate([live[:, 1], live[:, 0]])
    order = np.lexsort((other, ends))
    indices = other[order].astype(np.int64)
    indptr = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(ends, minlength=g.n), out=indptr[1:])
    return indptr, indices


def explore(g: Graph, f: FieldSample, o: OpenEdgeSet, v: int) -> ExplorationTrace:
    """Grow a vertex set from ``v`` through the open subgraph, recording the clock.

    While the open frontier of the current set is nonempty its smallest
    vertex is added (cluster step); otherwise the smallest unexplored vertex
    adjacent to the set in the base graph is added (jump step), falling back
    to adjacency through the held-out vertex when that is the only bridge.
    The largest-index vertex (or ``n-2`` when ``v`` is it) is held out so the
    capacity multiplier stays finite; exploration stops at ``n - 1`` vertices.
    """
    n = g.n
    if not 0 <= v < n:
        raise PreconditionError("start vertex %d out of range" % v)
    if f.phi.shape != (n,):
        raise DimensionMismatch("field sampled on a different graph")
    if o.open.shape != (g.m,):
        raise DimensionMismatch("open mask built on a different graph")
    holdout = n - 1 if v != n - 1 else n - 2

    lap = g.laplacian()
    deg = g.deg
    iptr_g, idx_g = g.neighbors
    iptr_o, idx_o = _open_adjacency(g, o)

    in_k = np.zeros(n, dtype=bool)
    frontier = np.zeros(n, dtype=bool)
    adj_k = np.zeros(n, dtype=bool)
    added: list[int] = []
    all_idx = np.arange(n, dtype=np.int64)

    def _absorb(u: int) -> None:
        in_k[u] = True
        frontier[u] = False
        frontier[idx_o[iptr_o[u]:iptr_o[u + 1]]] |= True
        adj_k[idx_g[iptr_g[u]:iptr_g[u + 1]]] = True
        frontier[in_k] = False
        frontier[holdout] = False

    steps = []
    in_cluster = True
    cap0 = 0.0
    u, is_cluster = v, True
    while True:
        _absorb(u)
        added.append(u)
        in_cluster = in_cluster and is_cluster
        k_idx = np.sort(np.asarray(added, dtype=np.int64))
        mask = np.zeros(n, dtype=bool)
        mask[k_idx] = True
        f_idx = all_idx[~mask]
        nu, a_on_k = _coefficients_on(lap, deg, g.two_m, k_idx, f_idx)
        cap = g.two_m * nu
        if len(added) == 1:
            cap0 = cap
        phi_k = f.phi[k_idx]
        m_blk = float((nu * deg[k_idx]) @ phi_k)
        m = float(a_on_k @ phi_k)
        steps.append(ExplorationStep(
            added=u, cluster_step=is_cluster, in_cluster=in_cluster,
            q=cap - cap0, m=m, m_blk=m_blk, m_bdr=m - m_blk,
        ))
        if len(added) >= n - 1:
            break
        front = np.flatnonzero(frontier)
        if front.size:
            u, is_cluster = int(front[0]), True
            continue
        jumpable = adj_k & ~in_k
        jumpable[holdout] = False
        cand = np.flatnonzero(jumpable)
        if cand.size == 0:
            # Only the held-out vertex bridges onward; jump across it.
            via = idx_g[iptr_g[holdout]:iptr_g[holdout + 1]]
            cand = via[~in_k[via]]
        u, is_cluster = int(cand.min()), False
    return ExplorationTrace(start=v, level=o.h, steps=tuple(steps),
                            seed=o.seed)


def time_change(t: ExplorationTrace) -> list[tuple[float, float]]:
    """The trace reparameterized by its capacity clock: pairs ``(q_i, m_i)``."""
    return [(s.q, s.m) for s in t.steps]


def trace_to_csv(t: ExplorationTrace) -> str:
    """Render a trace as ``step,added_vertex,cluster_step,q,m,m_blk,m_bdr`` CSV."""
    lines = ["step,added_vertex,cluster_step,q,m,m_blk,m_bdr"]
    for i, s in enumerate(t.steps):
        lines.append("%d,%d,%d,%s,%s,%s,%s" % (
            i, s.added, int(s.cluster_step),
            repr(s.q), repr(s.m), repr(s.m_blk), repr(s.m_bdr),
        ))
    return "\n".join(lines) + "\n"
