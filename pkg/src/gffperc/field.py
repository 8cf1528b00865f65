"""Centered Gaussian fields on a graph with degree-weighted zero average.

The field's covariance is pinned down by two requirements: the degree-weighted
sum of the field vanishes almost surely, and Dirichlet pairings against test
functions reproduce the Dirichlet form as their covariance.  Writing
``Q = I - (1 . deg^T)/two_m`` for the oblique projection onto the
zero-average constraint, the unique symmetric PSD solution is

    sigma = Q . pinv(L) . Q^T

and every sampler route below realizes a field with exactly this covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from numpy.polynomial.chebyshev import Chebyshev
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from . import rng as _rng
from .errors import (
    DimensionMismatch,
    FactorizationFailure,
    PreconditionError,
    TooLarge,
)
from .graphs import DENSE_THRESHOLD, Graph

__all__ = [
    "Covariance",
    "FieldSample",
    "Sampler",
    "covariance_matrix",
    "make_sampler",
    "sample",
    "dirichlet_pairing",
    "field_to_csv",
]

#: Relative ridge added to sigma before its Cholesky factorization.
CHOLESKY_RIDGE = 1e-12

#: Target relative sup-error of the polynomial inverse square root.
CHEB_TOL = 1e-4

#: Hard cap on the polynomial degree of the iterative route.
CHEB_MAX_DEGREE = 4000

ROUTES = ("eigen", "cholesky", "iterative")


@dataclass(frozen=True)
class Covariance:
    """Exact covariance of the zero-average field.

    Attributes
    ----------
    sigma : numpy.ndarray
        Dense symmetric PSD matrix with ``sigma @ deg = 0``.
    factor : numpy.ndarray
        ``(n, n-1)`` square root with ``factor @ factor.T = sigma``.
    """

    sigma: np.ndarray
    factor: np.ndarray


@dataclass(frozen=True)
class FieldSample:
    """One realization of the field.

    Attributes
    ----------
    phi : numpy.ndarray
        Field values per vertex.
    seed : int
        Seed that generated the draw.
    sampler_route : str
        ``"eigen"``, ``"cholesky"``, or ``"iterative"``.
    """

    phi: np.ndarray
    seed: int
    sampler_route: str


def _project_zero_average(g: Graph, x: np.ndarray) -> np.ndarray:
    """Apply ``Q = I - (1 . deg^T)/two_m``, enforcing the zero-average constraint."""
    return x - (g.deg @ x) / g.two_m


def _positive_eigenpairs(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues/vectors of the dense Laplacian restricted to the positive part."""
    lap = g.laplacian()
    w, v = scipy.linalg.eigh(lap)
    cut = w.max() * 1e-10
    keep = w > cut
    if keep.sum() != g.n - 1:
        raise FactorizationFailure(
            "expected exactly one null eigenvalue, found %d" % (g.n - int(keep.sum()))
        )
    return w[keep], v[:, keep]


def covariance_matrix(g: Graph) -> Covariance:
    """Exact covariance ``sigma = Q pinv(L) Q^T`` and a matching square root.

    Raises
    ------
    TooLarge
        Above the dense threshold; use the iterative sampler instead.
    """
    if g.n > DENSE_THRESHOLD:
        raise TooLarge("dense covariance limited to n <= %d" % DENSE_THRESHOLD)
    w, v = _positive_eigenpairs(g)
    pinv = (v / w) @ v.T
    q = np.eye(g.n) - np.outer(np.ones(g.n), g.deg) / g.two_m
    sigma = q @ pinv @ q.T
    sigma = (sigma + sigma.T) / 2.0
    factor = q @ (v / np.sqrt(w))
    return Covariance(sigma=sigma, factor=factor)


class Sampler:
    """Reusable, immutable field sampler for one graph and route.

    Built by :func:`make_sampler`; draw realizations with :meth:`sample`.
    All routes deliver the same law; they differ in how the square root of
    the covariance is applied.
    """

    def __init__(self, g: Graph, route: str, state: dict):
        self.graph = g
        self.route = route
        self._state = state

    def sample(self, seed: int) -> FieldSample:
        """Draw the field deterministically from ``seed``."""
        g = self.graph
        gen = _rng.generator(seed)
        if self.route == "eigen":
            w = self._state["eigenvalues"]
            v = self._state["eigenvectors"]
            xi = gen.standard_normal(w.size)
            raw = v @ (xi / np.sqrt(w))
        elif self.route == "cholesky":
            chol = self._state["chol"]
            xi = gen.standard_normal(g.n)
            raw = chol @ xi
        else:
            xi = gen.standard_normal(g.n)
            raw = _cheb_apply(self._state["lap"], self._state["coef"],
                              self._state["interval"], xi)
        phi = _project_zero_average(g, raw)
        return FieldSample(phi=phi, seed=int(seed), sampler_route=self.route)


def make_sampler(g: Graph, route: str = "eigen") -> Sampler:
    """Prepare a sampler for the requested route.

    ``eigen`` stores the positive eigenpairs of the Laplacian; ``cholesky``
    factors ``sigma`` plus a tiny ridge; ``iterative`` fits a Chebyshev
    polynomial approximation of the inverse square root on the positive
    spectrum, enabling sizes beyond the dense threshold.

    Raises
    ------
    TooLarge
        For dense routes above the threshold.
    FactorizationFailure
        If a factorization or polynomial fit fails.
    """
    if route not in ROUTES:
        raise PreconditionError("unknown sampler route %r" % route)
    if route == "eigen":
        if g.n > DENSE_THRESHOLD:
            raise TooLarge("eigen route limited to n <= %d" % DENSE_THRESHOLD)
        w, v = _positive_eigenpairs(g)
        return Sampler(g, route, {"eigenvalues": w, "eigenvectors": v})
    if route == "cholesky":
        if g.n > DENSE_THRESHOLD:
            raise TooLarge("cholesky route limited to n <= %d" % DENSE_THRESHOLD)
        sigma = covariance_matrix(g).sigma
        ridge = CHOLESKY_RIDGE * np.trace(sigma) / g.n
        try:
            chol = scipy.linalg.cholesky(sigma + ridge * np.eye(g.n), lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise FactorizationFailure("covariance factorization failed") from exc
        return Sampler(g, route, {"chol": chol})
    interval = _positive_spectrum_interval(g)
    coef = _fit_inverse_sqrt(interval)
    return Sampler(
        g, route,
        {"lap": g.laplacian(sparse=True), "coef": coef, "interval": interval},
    )


def sample(s: Sampler, seed: int) -> FieldSample:
    """Draw one field realization from ``s``; see :meth:`Sampler.sample`."""
    return s.sample(seed)


def _positive_spectrum_interval(g: Graph) -> tuple[float, float]:
    """Bracket the positive Laplacian spectrum: ``[0.95 mu_2, 1.05 mu_max]``."""
    if g.n <= 64:
        w = scipy.linalg.eigvalsh(g.laplacian())
        mu2, mumax = float(w[1]), float(w[-1])
    else:
        lap = g.laplacian(sparse=True).tocsc()
        try:
            top = eigsh(lap, k=1, which="LA", return_eigenvectors=False)
            low = eigsh(lap, k=2, sigma=-1e-2, which="LM",
                        return_eigenvectors=False)
        except ArpackNoConvergence as exc:
            raise FactorizationFailure("spectrum bracketing did not converge") from exc
        mumax = float(top[0])
        mu2 = float(np.sort(low)[1])
    if mu2 <= 0:
        raise FactorizationFailure("nonpositive second eigenvalue %g" % mu2)
    return 0.95 * mu2, 1.05 * mumax


def _fit_inverse_sqrt(interval: tuple[float, float]) -> np.ndarray:
    """Chebyshev coefficients of ``t -> 1/sqrt(t)`` on ``interval``.

    The degree is grown until the relative sup-error on a dense grid drops
    below ``CHEB_TOL``.
    """
    lo, hi = interval
    grid = np.linspace(lo, hi, 4001)
    target = 1.0 / np.sqrt(grid)
    deg = 8
    while deg <= CHEB_MAX_DEGREE:
        fit = Chebyshev.interpolate(lambda t: 1.0 / np.sqrt(t), deg, domain=[lo, hi])
        err = np.max(np.abs(fit(grid) - target) / target)
        if err <= CHEB_TOL:
            return fit.coef
        deg = int(deg * 1.6) + 1
    raise FactorizationFailure(
        "inverse-sqrt fit needs degree > %d (interval [%g, %g])"
        % (CHEB_MAX_DEGREE, lo, hi)
    )


def _cheb_apply(lap, coef: np.ndarray, interval: tuple[float, float],
                x: np.ndarray) -> np.ndarray:
    """Clenshaw evaluation of the fitted polynomial in the Laplacian times ``x``."""
    lo, hi = interval
    alpha = 2.0 / (hi - lo)
    beta = -(hi + lo) / (hi - lo)

    def scaled(vec):
        return alpha * (lap @ vec) + beta * vec

    bk1 = np.zeros_like(x)
    bk2 = np.zeros_like(x)
    for c in coef[:0:-1]:
        bk1, bk2 = c * x + 2.0 * scaled(bk1) - bk2, bk1
    return coef[0] * x + scaled(bk1) - bk2


def dirichlet_pairing(g: Graph, u: np.ndarray, v: np.ndarray) -> float:
    """Dirichlet form ``sum over edges of (u_x - u_y)(v_x - v_y)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (g.n,) or v.shape != (g.n,):
        raise DimensionMismatch("vectors must have length n=%d" % g.n)
    du = u[g.edges[:, 0]] - u[g.edges[:, 1]]
    dv = v[g.edges[:, 0]] - v[g.edges[:, 1]]
    return float(du @ dv)


def field_to_csv(f: FieldSample) -> str:
    """Render a field sample as ``vertex,phi`` CSV."""
    lines = ["vertex,phi"]
    lines.extend("%d,%s" % (i, repr(float(x))) for i, x in enumerate(f.phi))
    return "\n".join(lines) + "\n"
