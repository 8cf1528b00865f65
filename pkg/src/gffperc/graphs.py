"""Finite simple connected graphs: construction, generators, spectra.

The graph is the arena for everything else in the package: fields are indexed
by its vertices, percolation opens its edges, and capacities are Dirichlet
energies of functions on it.  Edges are kept in a single canonical order —
``(min, max)`` pairs sorted lexicographically — so that any per-edge random
stream is reproducible by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from . import rng as _rng
from .errors import (
    BadParams,
    Disconnected,
    DuplicateEdge,
    GenerationFailed,
    ParseError,
    PreconditionError,
    SelfLoop,
    SolverFailure,
    TooSmall,
)

__all__ = [
    "Graph",
    "SpectralReport",
    "build_from_edge_list",
    "gen_random_regular",
    "gen_named",
    "spectral_gap",
    "edge_boundary",
]

#: Largest vertex count for which dense linear algebra is used by default.
DENSE_THRESHOLD = 4096

#: Full re-pairing attempts before random-regular generation gives up.
REGULAR_RETRY_CAP = 1000


@dataclass(frozen=True)
class SpectralReport:
    """Result of a spectral-gap computation.

    Attributes
    ----------
    lambda_star : float
        Second-smallest generalized eigenvalue of ``(L, D)`` where ``L`` is
        the combinatorial Laplacian with unit conductances and
        ``D = diag(deg)``.  Strictly positive on a connected graph.
    method : str
        ``"dense-eigensolve"`` or ``"iterative"``.
    residual : float
        ``||L v - lambda D v||_2 / ||v||_2`` for the returned eigenpair.
    """

    lambda_star: float
    method: str
    residual: float


@dataclass(frozen=True)
class Graph:
    """Immutable simple connected graph.

    Attributes
    ----------
    n : int
        Number of vertices, labeled ``0 .. n-1``.
    edges : numpy.ndarray
        ``(m, 2)`` int32 array of edges, each row ``(u, v)`` with ``u < v``,
        rows sorted lexicographically.  The row index is the canonical edge
        index used by every per-edge random stream.
    deg : numpy.ndarray
        Per-vertex degree vector (int64).
    two_m : int
        Total degree, equal to twice the edge count.
    d_max : int
        Maximum degree.
    """

    n: int
    edges: np.ndarray
    deg: np.ndarray
    two_m: int
    d_max: int
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def m(self) -> int:
        """Number of edges."""
        return self.edges.shape[0]

    def laplacian(self, sparse: bool = False):
        """Combinatorial Laplacian ``L = D - A`` with unit conductances."""
        if sparse:
            return self._laplacian_sparse
        return self._laplacian_dense.copy()

    @cached_property
    def _laplacian_sparse(self):
        u, v = self.edges[:, 0], self.edges[:, 1]
        rows = np.concatenate([u, v, np.arange(self.n)])
        cols = np.concatenate([v, u, np.arange(self.n)])
        vals = np.concatenate(
            [-np.ones(self.m), -np.ones(self.m), self.deg.astype(float)]
        )
        lap = sp.csr_array((vals, (rows, cols)), shape=(self.n, self.n))
        return lap

    @cached_property
    def _laplacian_dense(self) -> np.ndarray:
        lap = np.zeros((self.n, self.n))
        u, v = self.edges[:, 0], self.edges[:, 1]
        lap[u, v] = -1.0
        lap[v, u] = -1.0
        lap[np.arange(self.n), np.arange(self.n)] = self.deg
        return lap

    @cached_property
    def neighbors(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR-style adjacency ``(indptr, indices)`` with sorted neighbor lists."""
        u, v = self.edges[:, 0], self.edges[:, 1]
        ends = np.concatenate([u, v])
        other = np.concatenate([v, u])
        order = np.lexsort((other, ends))
        indices = other[order].astype(np.int64)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(ends, minlength=self.n), out=indptr[1:])
        return indptr, indices

    @cached_property
    def gap(self) -> SpectralReport:
        """Cached spectral gap (auto-selected dense/iterative route)."""
        return spectral_gap(self)


def _finalize(n: int, pairs: np.ndarray, meta: dict | None = None) -> Graph:
    """Validate and canonicalize an edge array, returning a Graph.

    Raises SelfLoop / DuplicateEdge / TooSmall / Disconnected as appropriate.
    """
    if n < 2:
        raise TooSmall("need at least two vertices, got n=%d" % n)
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ParseError("edge array must have shape (m, 2)")
    if pairs.size == 0:
        raise Disconnected("no edges")
    if (pairs < 0).any() or (pairs >= n).any():
        raise ParseError("vertex index out of range 0..%d" % (n - 1))
    if (pairs[:, 0] == pairs[:, 1]).any():
        bad = pairs[pairs[:, 0] == pairs[:, 1]][0]
        raise SelfLoop("self-loop at vertex %d" % bad[0])
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    order = np.lexsort((hi, lo))
    canon = np.stack([lo[order], hi[order]], axis=1)
    dup = (np.diff(canon[:, 0]) == 0) & (np.diff(canon[:, 1]) == 0)
    if dup.any():
        u, v = canon[:-1][dup][0]
        raise DuplicateEdge("edge (%d, %d) appears more than once" % (u, v))
    deg = np.bincount(canon.ravel(), minlength=n).astype(np.int64)
    adj = sp.csr_array(
        (np.ones(2 * canon.shape[0]), (np.concatenate([canon[:, 0], canon[:, 1]]),
                                       np.concatenate([canon[:, 1], canon[:, 0]]))),
        shape=(n, n),
    )
    ncomp, _ = connected_components(adj, directed=False)
    if ncomp != 1:
        raise Disconnected("graph has %d components" % ncomp)
    return Graph(
        n=n,
        edges=canon.astype(np.int32),
        deg=deg,
        two_m=int(deg.sum()),
        d_max=int(deg.max()),
        meta=dict(meta or {}),
    )


def build_from_edge_list(text: str) -> Graph:
    """Parse an edge-list document into a Graph.

    The format is one edge per line, two whitespace-separated 0-based vertex
    indices; lines starting with ``#`` and blank lines are ignored.  The
    vertex count is inferred as ``max index + 1``.

    Raises
    ------
    ParseError, SelfLoop, DuplicateEdge, Disconnected, TooSmall
    """
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError("line %d: expected two vertex indices" % lineno)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError as exc:
            raise ParseError("line %d: %r is not an integer pair" % (lineno, line)) from exc
        if u < 0 or v < 0:
            raise ParseError("line %d: negative vertex index" % lineno)
        pairs.append((u, v))
    if not pairs:
        raise TooSmall("edge-list document contains no edges")
    arr = np.asarray(pairs, dtype=np.int64)
    return _finalize(int(arr.max()) + 1, arr)


def to_edge_list(g: Graph) -> str:
    """Render a Graph back into the edge-list document format."""
    lines = ["%d %d" % (u, v) for u, v in g.edges]
    return "\n".join(lines) + "\n"


def gen_random_regular(n: int, d: int, seed: int) -> Graph:
    """Generate a connected d-regular simple graph by the configuration model.

    Stubs are paired uniformly at random; any pairing that produces a
    self-loop, a parallel edge, or a disconnected graph is rejected and the
    whole pairing is redrawn, up to ``REGULAR_RETRY_CAP`` attempts.
    Deterministic given ``seed``.

    Raises
    ------
    PreconditionError
        If ``n * d`` is odd, ``d < 3``, or ``n <= d``.
    GenerationFailed
        If the retry cap is exhausted.
    """
    if (n * d) % 2 != 0:
        raise PreconditionError("n*d must be even, got n=%d d=%d" % (n, d))
    if d < 3:
        raise PreconditionError("d must be >= 3, got %d" % d)
    if n <= d:
        raise PreconditionError("need n > d, got n=%d d=%d" % (n, d))
    gen = _rng.generator(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    for _ in range(REGULAR_RETRY_CAP):
        perm = gen.permutation(stubs)
        u, v = perm[0::2], perm[1::2]
        if (u == v).any():
            continue
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        keys = lo * n + hi
        if np.unique(keys).size != keys.size:
            continue
        try:
            return _finalize(n, np.stack([u, v], axis=1),
                             meta={"family": "rrg", "d": d, "seed": seed})
        except Disconnected:
            continue
    raise GenerationFailed(
        "no simple connected %d-regular graph on %d vertices in %d attempts"
        % (d, n, REGULAR_RETRY_CAP)
    )


def gen_named(family: str, **params) -> Graph:
    """Build a named deterministic graph family.

    Supported: ``cycle`` (param n >= 3), ``complete`` (n >= 2), ``path``
    (n >= 2), ``torus`` (side >= 3, dim >= 1; the 2*dim-regular discrete
    torus on side**dim vertices).
    """
    if family == "cycle":
        n = int(params.get("n", 0))
        if n < 3:
            raise BadParams("cycle needs n >= 3")
        idx = np.arange(n, dtype=np.int64)
        pairs = np.stack([idx, (idx + 1) % n], axis=1)
        return _finalize(n, pairs, meta={"family": "cycle"})
    if family == "complete":
        n = int(params.get("n", 0))
        if n < 2:
            raise BadParams("complete needs n >= 2")
        iu = np.triu_indices(n, k=1)
        return _finalize(n, np.stack(iu, axis=1), meta={"family": "complete"})
    if family == "path":
        n = int(params.get("n", 0))
        if n < 2:
            raise BadParams("path needs n >= 2")
        idx = np.arange(n - 1, dtype=np.int64)
        return _finalize(n, np.stack([idx, idx + 1], axis=1), meta={"family": "path"})
    if family == "torus":
        side = int(params.get("side", 0))
        dim = int(params.get("dim", 0))
        if side < 3 or dim < 1:
            raise BadParams("torus needs side >= 3 and dim >= 1")
        n = side**dim
        coords = np.stack(
            np.unravel_index(np.arange(n), (side,) * dim), axis=1
        )
        pairs = []
        for axis in range(dim):
            shifted = coords.copy()
            shifted[:, axis] = (shifted[:, axis] + 1) % side
            nbr = np.ravel_multi_index(tuple(shifted.T), (side,) * dim)
            pairs.append(np.stack([np.arange(n), nbr], axis=1))
        return _finalize(n, np.concatenate(pairs, axis=0),
                         meta={"family": "torus", "side": side, "dim": dim})
    raise BadParams("unknown family %r" % family)


def spectral_gap(g: Graph, method: str = "auto") -> SpectralReport:
    """Second-smallest generalized eigenvalue of ``(L, diag(deg))``.

    ``method`` is ``"auto"`` (dense up to ``DENSE_THRESHOLD``, iterative
    beyond), ``"dense"``, or ``"iterative"``.  The iterative route is
    shift-invert Lanczos near zero on the sparse pencil.

    Raises
    ------
    SolverFailure
        If the iterative eigensolver does not converge.
    """
    if method == "auto":
        method = "dense" if g.n <= DENSE_THRESHOLD else "iterative"
    if method == "dense":
        lap = g.laplacian()
        dmat = np.diag(g.deg.astype(float))
        w, vecs = scipy.linalg.eigh(lap, dmat, subset_by_index=[0, 1])
        lam = float(w[1])
        vec = vecs[:, 1]
        resid = np.linalg.norm(lap @ vec - lam * (g.deg * vec)) / np.linalg.norm(vec)
        return SpectralReport(lambda_star=lam, method="dense-eigensolve",
                              residual=float(resid))
    if method != "iterative":
        raise PreconditionError("unknown spectral method %r" % method)
    lap = g.laplacian(sparse=True)
    dmat = sp.diags_array(g.deg.astype(float), format="csc")
    # Generalized eigenvalues of (L, D) lie in [0, 2]; a small negative shift
    # keeps the shift-invert factorization nonsingular and targets {0, gap}.
    try:
        w, vecs = eigsh(lap.tocsc(), k=2, M=dmat, sigma=-1e-2, which="LM")
    except ArpackNoConvergence as exc:
        raise SolverFailure("spectral-gap iteration did not converge") from exc
    order = np.argsort(w)
    lam = float(w[order[1]])
    vec = vecs[:, order[1]]
    resid = np.linalg.norm(lap @ vec - lam * (g.deg * vec)) / np.linalg.norm(vec)
    return SpectralReport(lambda_star=lam, method="iterative", residual=float(resid))


def edge_boundary(g: Graph, s) -> int:
    """Number of edges with exactly one endpoint in the vertex set ``s``."""
    mask = np.zeros(g.n, dtype=bool)
    idx = np.asarray(sorted(set(int(x) for x in s)), dtype=np.int64)
    if idx.size:
        if idx.min() < 0 or idx.max() >= g.n:
            raise PreconditionError("vertex set not contained in 0..%d" % (g.n - 1))
        mask[idx] = True
    return int(np.count_nonzero(mask[g.edges[:, 0]] ^ mask[g.edges[:, 1]]))
