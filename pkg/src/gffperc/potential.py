"""Discrete potential theory under the degree-weighted zero-average constraint.

For a nonempty proper vertex subset ``K`` the killed Green function is the
inverse of the Laplacian restricted off ``K``; from it follow hitting
distributions of the random walk, the equilibrium potential, and the
zero-average capacity.  Capacities are computed by two independent routes —
the Green-sum formula and an equality-constrained quadratic program — which
the test suite holds to agreement at close to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.linalg

from .errors import BadK, RouteMismatch, SolverFailure, TooLarge
from .field import dirichlet_pairing
from .graphs import DENSE_THRESHOLD, Graph

__all__ = [
    "KilledGreen",
    "CapacityResult",
    "HarmonicExtension",
    "killed_green",
    "hitting_distribution",
    "capacity_green",
    "capacity_dirichlet",
    "harmonic_extension",
]

#: Residual tolerance for the refined KKT solve.
KKT_TOL = 1e-11


@dataclass(frozen=True)
class KilledGreen:
    """Green function of the walk killed on ``k_set``.

    Attributes
    ----------
    k_set : numpy.ndarray
        Sorted killing set K.
    green : numpy.ndarray
        Dense n-by-n matrix, the inverse of the Laplacian restricted to the
        complement of K, extended by zero on K rows and columns.
    """

    k_set: np.ndarray
    green: np.ndarray


@dataclass(frozen=True)
class CapacityResult:
    """Zero-average capacity of a vertex set.

    Attributes
    ----------
    nu : float
        The normalized capacity multiplier.
    cap : float
        ``two_m * nu``, the minimal Dirichlet energy of a function equal to 1
        on K with degree-weighted zero average.
    f_k : numpy.ndarray
        The equilibrium potential attaining the minimum.
    route : str
        ``"green-sum"`` or ``"dirichlet"``.
    """

    nu: float
    cap: float
    f_k: np.ndarray
    route: str


@dataclass(frozen=True)
class HarmonicExtension:
    """Energy-minimizing extension of boundary data under the zero-average constraint.

    Attributes
    ----------
    boundary : dict
        Prescribed values on K.
    f_phi : numpy.ndarray
        The extension on all of V.
    nu_phi : float
        The constraint multiplier in the explicit representation.
    """

    boundary: dict
    f_phi: np.ndarray
    nu_phi: float


def _vertex_set(g: Graph, k) -> np.ndarray:
    """Validate and sort a killing set; BadK when empty, full, or out of range."""
    arr = np.asarray(sorted(set(int(x) for x in k)), dtype=np.int64)
    if arr.size == 0:
        raise BadK("vertex set is empty")
    if arr.size >= g.n:
        raise BadK("vertex set covers the whole graph (capacity undefined)")
    if arr[0] < 0 or arr[-1] >= g.n:
        raise BadK("vertex index out of range 0..%d" % (g.n - 1))
    return arr


def _complement(g: Graph, k_arr: np.ndarray) -> np.ndarray:
    mask = np.ones(g.n, dtype=bool)
    mask[k_arr] = False
    return np.flatnonzero(mask)


def _check_dense(g: Graph) -> None:
    if g.n > DENSE_THRESHOLD:
        raise TooLarge("dense potential-theory solves limited to n <= %d"
                       % DENSE_THRESHOLD)


def killed_green(g: Graph, k) -> KilledGreen:
    """Invert the Laplacian off ``k``; zero rows/columns on ``k``."""
    k_arr = _vertex_set(g, k)
    _check_dense(g)
    f_idx = _complement(g, k_arr)
    lap = g.laplacian()
    sub = lap[np.ix_(f_idx, f_idx)]
    try:
        cho = scipy.linalg.cho_factor(sub)
        inv = scipy.linalg.cho_solve(cho, np.eye(f_idx.size))
    except scipy.linalg.LinAlgError as exc:
        raise SolverFailure("killed Laplacian factorization failed") from exc
    inv = (inv + inv.T) / 2.0
    green = np.zeros((g.n, g.n))
    green[np.ix_(f_idx, f_idx)] = inv
    return KilledGreen(k_set=k_arr, green=green)


def hitting_distribution(g: Graph, k) -> np.ndarray:
    """Distribution of the walk's first visit to ``k``.

    Returns an ``(n, |k|)`` matrix whose row ``y`` is the distribution of the
    hitting location over the sorted killing set: the harmonic solve with a
    point mass prescribed at each target in turn.  Rows sum to one.
    """
    k_arr = _vertex_set(g, k)
    _check_dense(g)
    f_idx = _complement(g, k_arr)
    lap = g.laplacian()
    adj_fk = -lap[np.ix_(f_idx, k_arr)]
    try:
        interior = scipy.linalg.solve(lap[np.ix_(f_idx, f_idx)], adj_fk,
                                      assume_a="pos")
    except scipy.linalg.LinAlgError as exc:
        raise SolverFailure("harmonic solve failed") from exc
    out = np.zeros((g.n, k_arr.size))
    out[f_idx, :] = interior
    out[k_arr, np.arange(k_arr.size)] = 1.0
    return out


def _green_sum_parts(g: Graph, k_arr: np.ndarray):
    """Shared solve for the Green-sum route: returns (f_idx, s, denom).

    ``s`` solves the killed Laplacian against the interior degrees, so
    ``denom = deg_F . s`` is the double degree-weighted Green sum.
    """
    f_idx = _complement(g, k_arr)
    lap = g.laplacian()
    d_f = g.deg[f_idx].astype(float)
    try:
        cho = scipy.linalg.cho_factor(lap[np.ix_(f_idx, f_idx)])
        s = scipy.linalg.cho_solve(cho, d_f)
    except scipy.linalg.LinAlgError as exc:
        raise SolverFailure("killed Laplacian factorization failed") from exc
    return f_idx, s, float(d_f @ s)


def capacity_green(g: Graph, k) -> CapacityResult:
    """Capacity via the Green-sum formula.

    ``nu`` is ``two_m`` divided by the degree-weighted double sum of the
    killed Green function, and the equilibrium potential is
    ``1 - nu * (green @ deg)`` off K, one on K.
    """
    k_arr = _vertex_set(g, k)
    _check_dense(g)
    f_idx, s, denom = _green_sum_parts(g, k_arr)
    nu = g.two_m / denom
    f = np.ones(g.n)
    f[f_idx] = 1.0 - nu * s
    return CapacityResult(nu=nu, cap=g.two_m * nu, f_k=f, route="green-sum")


def _solve_kkt(g: Graph, k_arr: np.ndarray, bvals: np.ndarray) -> np.ndarray:
    """Minimize the Dirichlet energy subject to ``f|K = bvals`` and ``deg . f = 0``.

    Dense LU on the stationarity system with iterative refinement; raises
    SolverFailure when the refined residual is still above ``KKT_TOL``.
    """
    n, r = g.n, k_arr.size
    lap = g.laplacian()
    size = n + r + 1
    mat = np.zeros((size, size))
    mat[:n, :n] = 2.0 * lap
    cons = np.zeros((r + 1, n))
    cons[np.arange(r), k_arr] = 1.0
    cons[r, :] = g.deg
    mat[n:, :n] = cons
    mat[:n, n:] = cons.T
    rhs = np.zeros(size)
    rhs[n:n + r] = bvals
    try:
        lu = scipy.linalg.lu_factor(mat)
    except scipy.linalg.LinAlgError as exc:
        raise SolverFailure("KKT factorization failed") from exc
    z = scipy.linalg.lu_solve(lu, rhs)
    scale = 1.0 + np.abs(rhs).max()
    for _ in range(3):
        resid = rhs - mat @ z
        if np.abs(resid).max() <= KKT_TOL * scale:
            break
        z = z + scipy.linalg.lu_solve(lu, resid)
    resid = rhs - mat @ z
    if np.abs(resid).max() > KKT_TOL * scale:
        raise SolverFailure(
            "KKT residual %g above tolerance" % float(np.abs(resid).max())
        )
    return z[:n]


def capacity_dirichlet(g: Graph, k) -> CapacityResult:
    """Capacity as the optimal value of the constrained quadratic program."""
    k_arr = _vertex_set(g, k)
    _check_dense(g)
    f = _solve_kkt(g, k_arr, np.ones(k_arr.size))
    cap = dirichlet_pairing(g, f, f)
    return CapacityResult(nu=cap / g.two_m, cap=cap, f_k=f, route="dirichlet")


def harmonic_extension(g: Graph, k, boundary: Mapping[int, float]) -> HarmonicExtension:
    """Extend boundary data on ``k`` with minimal energy and zero average.

    Two routes are computed and compared: the constrained quadratic program,
    and the explicit representation through the hitting distribution and the
    killed Green function.  Disagreement beyond tolerance raises
    RouteMismatch; the quadratic-program solution is returned.
    """
    k_arr = _vertex_set(g, k)
    _check_dense(g)
    try:
        bvals = np.asarray([float(boundary[int(x)]) for x in k_arr])
    except KeyError as exc:
        raise BadK("boundary data missing for vertex %s" % exc) from exc
    f_kkt = _solve_kkt(g, k_arr, bvals)

    hit = hitting_distribution(g, k_arr)
    expected = hit @ bvals
    f_idx, s, denom = _green_sum_parts(g, k_arr)
    nu_phi = float(g.deg @ expected) / denom
    f_rep = expected.copy()
    f_rep[f_idx] -= nu_phi * s

    scale = 1.0 + (np.abs(bvals).max() if bvals.size else 0.0)
    gap = np.abs(f_kkt - f_rep).max()
    if gap > 1e-9 * scale:
        raise RouteMismatch(
            "harmonic extension routes disagree by %g (tolerance %g)"
            % (float(gap), 1e-9 * scale)
        )
    return HarmonicExtension(
        boundary={int(x): float(b) for x, b in zip(k_arr, bvals)},
        f_phi=f_kkt,
        nu_phi=nu_phi,
    )
