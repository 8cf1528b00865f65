"""Monte Carlo sweep harness for the phase-diagram experiments.

A sweep runs a grid of (graph size, level, trial) cells on one graph family,
recording largest-cluster statistics per cell.  Levels are given either in
window units (``a_list``, level ``h = A * n**(-1/3)``) or as fixed levels
(``h_list``).  Within a trial all levels share one field realization and one
per-edge uniform stream, which couples the open sets monotonically across
levels.  Every stream seed is derived from the master seed and the cell
labels by a fixed hash, so any cell is reproducible in isolation and results
are byte-identical no matter how many workers run the sweep.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from . import rng as _rng
from .errors import (
    BadParams,
    EmptyInput,
    GffpercError,
    InsufficientData,
    PreconditionError,
)
from .field import Sampler, make_sampler
from .graphs import DENSE_THRESHOLD, Graph, gen_named, gen_random_regular, spectral_gap
from .percolation import clusters, percolate_levels

__all__ = [
    "SweepSpec",
    "SweepRow",
    "run_sweep",
    "sweep_to_csv",
    "estimate_exponent",
    "summarize",
    "SWEEP_CSV_HEADER",
]

SWEEP_CSV_HEADER = (
    "family,n,d,A,h,trial,seed,cmax,second_cmax,num_clusters,lambda_star,wall_ms"
)

_SWEEP_FAMILIES = ("rrg", "cycle", "complete", "path")


@dataclass(frozen=True)
class SweepSpec:
    """Declarative description of one sweep.

    Exactly one of ``a_list`` (window units) and ``h_list`` (fixed levels)
    must be given.  ``sampler_route`` of ``"auto"`` picks the eigen route up
    to the dense threshold and the iterative route beyond.  With ``timing``
    false (the default) the wall_ms column is written as 0 so that output is
    reproducible byte for byte; set it to record real per-trial timings.
    """

    family: str
    n_list: tuple
    trials: int
    master_seed: int
    d: int = 3
    a_list: tuple | None = None
    h_list: tuple | None = None
    sampler_route: str = "auto"
    timing: bool = False

    def __post_init__(self):
        if self.family not in _SWEEP_FAMILIES:
            raise BadParams("sweep family must be one of %s" % (_SWEEP_FAMILIES,))
        if self.trials < 1:
            raise PreconditionError("trials must be >= 1")
        ns = tuple(int(x) for x in self.n_list)
        if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
            raise PreconditionError("n_list must be nonempty and ascending")
        object.__setattr__(self, "n_list", ns)
        if (self.a_list is None) == (self.h_list is None):
            raise PreconditionError("give exactly one of a_list and h_list")
        if self.a_list is not None:
            object.__setattr__(self, "a_list", tuple(float(x) for x in self.a_list))
            if not self.a_list:
                raise PreconditionError("a_list is empty")
        else:
            object.__setattr__(self, "h_list", tuple(float(x) for x in self.h_list))
            if not self.h_list:
                raise PreconditionError("h_list is empty")

    def levels_for(self, n: int) -> list[tuple[float, float]]:
        """Resolve the level grid at size ``n`` as ``(A, h)`` pairs."""
        if self.a_list is not None:
            return [(a, a * float(n) ** (-1.0 / 3.0)) for a in self.a_list]
        return [(h * float(n) ** (1.0 / 3.0), h) for h in self.h_list]


@dataclass(frozen=True)
class SweepRow:
    """One (n, level, trial) cell of a sweep."""

    family: str
    n: int
    d: int
    a: float
    h: float
    trial: int
    seed: int
    cmax: int | None
    second_cmax: int | None
    num_clusters: int | None
    lambda_star: float | None
    wall_ms: int
    error: str | None = None


def _intended_degree(spec: SweepSpec, n: int) -> int:
    if spec.family == "rrg":
        return spec.d
    if spec.family == "complete":
        return n - 1
    return 2


def _build_graph(spec: SweepSpec, n: int) -> Graph:
    seed = _rng.derive_seed(spec.master_seed, "graph", spec.family, n, spec.d)
    if spec.family == "rrg":
        return gen_random_regular(n, spec.d, seed)
    return gen_named(spec.family, n=n)


def _resolve_route(spec: SweepSpec, n: int) -> str:
    if spec.sampler_route != "auto":
        return spec.sampler_route
    return "eigen" if n <= DENSE_THRESHOLD else "iterative"


# Per-size context shared with forked workers.
_CTX: dict = {}


def _trial_rows(trial: int) -> list[SweepRow]:
    spec: SweepSpec = _CTX["spec"]
    g: Graph = _CTX["graph"]
    sampler: Sampler = _CTX["sampler"]
    levels = _CTX["levels"]
    n, lam = _CTX["n"], _CTX["lambda_star"]
    t0 = time.perf_counter()
    field_seed = _rng.derive_seed(spec.master_seed, "field", spec.family, n,
                                  spec.d, trial)
    edge_seed = _rng.derive_seed(spec.master_seed, "edges", spec.family, n,
                                 spec.d, trial)
    rows = []
    try:
        f = sampler.sample(field_seed)
        opens = percolate_levels(g, f, [h for _, h in levels], edge_seed)
        stats = [clusters(g, o) for o in opens]
    except GffpercError as exc:
        return _error_rows(spec, n, [trial], type(exc).__name__, lam)
    wall = int(round((time.perf_counter() - t0) * 1000)) if spec.timing else 0
    for a_idx, ((a, h), st) in enumerate(zip(levels, stats)):
        rows.append(SweepRow(
            family=spec.family, n=n, d=g.d_max, a=a, h=h, trial=trial,
            seed=_rng.derive_seed(spec.master_seed, "cell", spec.family, n,
                                  spec.d, a_idx, trial),
            cmax=st.cmax, second_cmax=st.second_cmax,
            num_clusters=st.num_clusters, lambda_star=lam, wall_ms=wall,
        ))
    return rows


def _error_rows(spec: SweepSpec, n: int, trials, err: str,
                lam: float | None) -> list[SweepRow]:
    rows = []
    levels = spec.levels_for(n)
    for trial in trials:
        for a_idx, (a, h) in enumerate(levels):
            rows.append(SweepRow(
                family=spec.family, n=n, d=_intended_degree(spec, n), a=a, h=h,
                trial=trial,
                seed=_rng.derive_seed(spec.master_seed, "cell", spec.family, n,
                                      spec.d, a_idx, trial),
                cmax=None, second_cmax=None, num_clusters=None,
                lambda_star=lam, wall_ms=0, error=err,
            ))
    return rows


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[SweepRow]:
    """Run the sweep, returning rows in deterministic (n, level, trial) order.

    ``jobs > 1`` forks worker processes over trials; per-cell seeds and the
    fixed reduce order make the result independent of the worker count.
    Graph generation or sampling failures are recorded as error rows rather
    than aborting the sweep.
    """
    if jobs < 1:
        raise PreconditionError("jobs must be >= 1")
    all_rows: list[SweepRow] = []
    for n in spec.n_list:
        levels = spec.levels_for(n)
        try:
            g = _build_graph(spec, n)
            lam = spectral_gap(g).lambda_star
            sampler = make_sampler(g, _resolve_route(spec, n))
        except GffpercError as exc:
            all_rows.extend(_error_rows(spec, n, range(spec.trials),
                                        type(exc).__name__, None))
            continue
        _CTX.update(spec=spec, graph=g, sampler=sampler, levels=levels,
                    n=n, lambda_star=lam)
        try:
            if jobs == 1:
                per_trial = [_trial_rows(t) for t in range(spec.trials)]
            else:
                with get_context("fork").Pool(processes=jobs) as pool:
                    per_trial = pool.map(_trial_rows, range(spec.trials))
        finally:
            _CTX.clear()
        # Reduce in (level, trial) order regardless of completion order; every
        # per-trial list holds exactly one row per level, in level order.
        for a_idx in range(len(levels)):
            for trial in range(spec.trials):
                all_rows.append(per_trial[trial][a_idx])
    return all_rows


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def sweep_to_csv(rows) -> str:
    """Render rows under the fixed sweep header; error rows mark the cmax field."""
    lines = [SWEEP_CSV_HEADER]
    for r in rows:
        cmax = "ERROR:%s" % r.error if r.error is not None else _fmt(r.cmax)
        lines.append(",".join([
            r.family, str(r.n), str(r.d), _fmt(r.a), _fmt(r.h), str(r.trial),
            str(r.seed), cmax, _fmt(r.second_cmax), _fmt(r.num_clusters),
            _fmt(r.lambda_star), str(r.wall_ms),
        ]))
    return "\n".join(lines) + "\n"


def estimate_exponent(rows, a_value: float, bootstrap: int = 1000,
                      seed: int = 12345) -> tuple[float, float]:
    """Least-squares slope of log median cmax against log n at one level.

    Returns ``(slope, stderr)`` where the standard error comes from
    resampling trials within each size ``bootstrap`` times (deterministic
    given ``seed``).

    Raises
    ------
    InsufficientData
        Fewer than three distinct sizes at this level.
    """
    by_n: dict[int, list[int]] = {}
    for r in rows:
        if r.error is None and math.isclose(r.a, a_value, rel_tol=1e-12,
                                            abs_tol=1e-12):
            by_n.setdefault(r.n, []).append(r.cmax)
    if len(by_n) < 3:
        raise InsufficientData(
            "need >= 3 distinct sizes at A=%g, have %d" % (a_value, len(by_n))
        )
    ns = sorted(by_n)
    log_n = np.log(np.asarray(ns, dtype=float))
    med = np.asarray([np.median(by_n[n]) for n in ns])
    slope = float(np.polyfit(log_n, np.log(med), 1)[0])
    gen = _rng.generator(_rng.derive_seed(seed, "exponent-bootstrap"))
    samples = {n: np.asarray(by_n[n], dtype=float) for n in ns}
    boot = np.empty(bootstrap)
    for b in range(bootstrap):
        meds = [
            np.median(gen.choice(samples[n], size=samples[n].size, replace=True))
            for n in ns
        ]
        boot[b] = np.polyfit(log_n, np.log(np.asarray(meds)), 1)[0]
    return slope, float(boot.std(ddof=1))


def summarize(rows) -> list[dict]:
    """Aggregate rows per (n, level): mean and 10/50/90% quantiles.

    Each cell reports the statistics of cmax and of the normalizations
    cmax/n, cmax/n^(2/3), cmax/log n.

    Raises
    ------
    EmptyInput
        No valid rows.
    """
    groups: dict[tuple, list[SweepRow]] = {}
    for r in rows:
        if r.error is None:
            groups.setdefault((r.n, r.a), []).append(r)
    if not groups:
        raise EmptyInput("no valid rows to summarize")
    out = []
    for (n, a) in sorted(groups):
        cell = groups[(n, a)]
        rec = {
            "family": cell[0].family, "n": n, "d": cell[0].d, "A": a,
            "h": cell[0].h, "trials": len(cell),
        }
        cmax = np.asarray([r.cmax for r in cell], dtype=float)
        norms = {
            "cmax": cmax,
            "cmax_over_n": cmax / n,
            "cmax_over_n23": cmax / float(n) ** (2.0 / 3.0),
            "cmax_over_logn": cmax / math.log(n),
        }
        for name, vals in norms.items():
            q10, q50, q90 = np.quantile(vals, [0.1, 0.5, 0.9])
            rec["%s_mean" % name] = float(vals.mean())
            rec["%s_q10" % name] = float(q10)
            rec["%s_q50" % name] = float(q50)
            rec["%s_q90" % name] = float(q90)
        out.append(rec)
    return out
