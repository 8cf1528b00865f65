"""Command-line front end.

Subcommands: ``gen`` (emit an edge list), ``gap`` (spectral gap), ``sample``
(field CSV), ``percolate`` (cluster stats JSON, optional cluster CSV dump),
``capacity`` (capacity JSON for a vertex set), ``explore`` (trace CSV), and
``sweep`` (experiment grid: CSV rows plus a JSON summary).

Every randomized subcommand takes ``--seed`` and derives one labeled stream
per purpose ("graph", "field", "edges"), so runs are bit-reproducible and
`gen`, `sample`, and `percolate` with the same seed see the same graph and
field.  A ``--config`` file may hold ``key = value`` lines mirroring the flag
names; explicit flags win.  Exit codes: 0 success, 1 usage error, 2 runtime
error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import experiments, field, graphs, martingale, percolation, potential
from . import rng as _rng
from .errors import GffpercError

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        raise SystemExit(1)


_TRUE_WORDS = {"1", "true", "yes", "on"}


def _parse_config(path: str) -> dict:
    """Flat key-value config: ``key = value`` or ``key value`` per line."""
    cfg = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" in line:
            key, _, value = line.partition("=")
        else:
            key, _, value = line.partition(" ")
        key = key.strip().lstrip("-").replace("-", "_")
        if not key:
            raise _UsageError("malformed config line: %r" % raw)
        if key in ("A", "a"):
            key = "a_level"
        cfg[key] = value.strip()
    return cfg


class _Options:
    """Flag values resolved against the config file and builtin defaults."""

    def __init__(self, ns: argparse.Namespace):
        self.ns = ns
        self.cfg = _parse_config(ns.config) if ns.config else {}

    def get(self, name: str, default=None, conv=str):
        value = getattr(self.ns, name, None)
        if value is None and name in self.cfg:
            value = self.cfg[name]
        if value is None:
            return default
        if isinstance(value, str) and conv is not str:
            if conv is bool:
                return value.lower() in _TRUE_WORDS
            try:
                value = conv(value)
            except _UsageError:
                raise
            except (TypeError, ValueError) as exc:
                raise _UsageError(
                    "bad value for --%s: %r" % (name.replace("_", "-"), value)
                ) from exc
        return value

    def require(self, name: str, conv=str, flag: str | None = None):
        value = self.get(name, None, conv)
        if value is None:
            raise _UsageError("missing required option --%s" % (flag or name))
        return value

    def resolved(self, names) -> dict:
        return {name: self.get(name) for name in names}


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in str(text).split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise _UsageError("expected comma-separated integers, got %r" % text) from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise _UsageError("expected comma-separated numbers, got %r" % text) from exc


def _load_graph(opt: _Options) -> graphs.Graph:
    path = opt.get("graph")
    if path is not None:
        return graphs.build_from_edge_list(Path(path).read_text())
    family = opt.require("family")
    seed = opt.get("seed", 0, int)
    if family == "rrg":
        n = opt.require("n", int)
        d = opt.get("d", 3, int)
        return graphs.gen_random_regular(
            n, d, _rng.derive_seed(seed, "graph", family, n, d))
    if family == "torus":
        side = opt.require("side", int)
        dim = opt.get("dim", 2, int)
        return graphs.gen_named("torus", side=side, dim=dim)
    if family in ("cycle", "complete", "path"):
        return graphs.gen_named(family, n=opt.require("n", int))
    raise _UsageError("unknown family %r" % family)


def _resolve_level(opt: _Options, n: int) -> float:
    h = opt.get("h", None, float)
    a = opt.get("a_level", None, float)
    if (h is None) == (a is None):
        raise _UsageError("give exactly one of --h and --A")
    return h if h is not None else a * float(n) ** (-1.0 / 3.0)


def _auto_route(opt: _Options, n: int) -> str:
    route = opt.get("route", "auto")
    if route == "auto":
        return "eigen" if n <= graphs.DENSE_THRESHOLD else "iterative"
    return route


def _emit(opt: _Options, text: str, meta: dict) -> None:
    """Write the primary payload to --out or stdout, recording the config.

    With --out the resolved config goes to a ``.meta.json`` sidecar; without
    it, to one JSON line on stderr.
    """
    out = opt.get("out")
    if out is not None:
        Path(out).write_text(text)
        Path(out + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    else:
        sys.stdout.write(text)
        sys.stderr.write(json.dumps(meta) + "\n")


def _meta(opt: _Options, cmd: str, names) -> dict:
    rec = {"subcommand": cmd}
    rec.update(opt.resolved(names))
    return rec


_GRAPH_FLAGS = ("family", "n", "d", "side", "dim", "graph", "seed")


def _cmd_gen(opt: _Options) -> int:
    g = _load_graph(opt)
    _emit(opt, graphs.to_edge_list(g), _meta(opt, "gen", _GRAPH_FLAGS))
    return 0


def _cmd_gap(opt: _Options) -> int:
    g = _load_graph(opt)
    rep = g.gap
    lines = ["lambda_star %s" % repr(round(rep.lambda_star, 12))]
    if opt.get("pretty", False, bool):
        lines.append("method %s" % rep.method)
        lines.append("residual %s" % repr(rep.residual))
    _emit(opt, "\n".join(lines) + "\n", _meta(opt, "gap", _GRAPH_FLAGS))
    return 0


def _field_sample(opt: _Options, g: graphs.Graph) -> field.FieldSample:
    seed = opt.get("seed", 0, int)
    sampler = field.make_sampler(g, _auto_route(opt, g.n))
    return sampler.sample(_rng.derive_seed(seed, "field"))


def _cmd_sample(opt: _Options) -> int:
    g = _load_graph(opt)
    f = _field_sample(opt, g)
    if opt.get("format", "csv") == "json":
        payload = json.dumps(
            {"seed": f.seed, "route": f.sampler_route,
             "phi": [float(x) for x in f.phi]}) + "\n"
    else:
        payload = field.field_to_csv(f)
    _emit(opt, payload, _meta(opt, "sample", _GRAPH_FLAGS + ("route", "format")))
    return 0


def _cmd_percolate(opt: _Options) -> int:
    g = _load_graph(opt)
    f = _field_sample(opt, g)
    h = _resolve_level(opt, g.n)
    seed = opt.get("seed", 0, int)
    o = percolation.percolate(g, f, h, _rng.derive_seed(seed, "edges"))
    st = percolation.clusters(g, o)
    stats = {
        "n": g.n, "h": h, "cmax": st.cmax, "cmax_root": st.cmax_root,
        "second_cmax": st.second_cmax, "num_clusters": st.num_clusters,
    }
    out = opt.get("out")
    meta = _meta(opt, "percolate", _GRAPH_FLAGS + ("h", "a_level", "route"))
    if out is not None:
        Path(out).write_text(percolation.clusters_to_csv(g, o))
        Path(out + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    else:
        sys.stderr.write(json.dumps(meta) + "\n")
    if opt.get("pretty", False, bool):
        sys.stdout.write(
            "largest cluster %d (root %d) of %d clusters at h=%g\n"
            % (st.cmax, st.cmax_root, st.num_clusters, h))
    sys.stdout.write(json.dumps(stats) + "\n")
    return 0


def _cmd_capacity(opt: _Options) -> int:
    g = _load_graph(opt)
    k = _int_list(opt.require("k"))
    route = opt.get("capacity_route", "green")
    if route in ("green", "green-sum"):
        res = potential.capacity_green(g, k)
    elif route == "dirichlet":
        res = potential.capacity_dirichlet(g, k)
    else:
        raise _UsageError("capacity route must be green or dirichlet")
    payload = {
        "k": [int(x) for x in sorted(set(k))],
        "nu": res.nu, "cap": res.cap, "route": res.route,
        "f": [float(x) for x in res.f_k],
    }
    text = json.dumps(payload, indent=2 if opt.get("pretty", False, bool) else None)
    _emit(opt, text + "\n",
          _meta(opt, "capacity", _GRAPH_FLAGS + ("k", "capacity_route")))
    return 0


def _cmd_explore(opt: _Options) -> int:
    g = _load_graph(opt)
    f = _field_sample(opt, g)
    h = _resolve_level(opt, g.n)
    seed = opt.get("seed", 0, int)
    o = percolation.percolate(g, f, h, _rng.derive_seed(seed, "edges"))
    start = opt.get("start", 0, int)
    trace = martingale.explore(g, f, o, start)
    _emit(opt, martingale.trace_to_csv(trace),
          _meta(opt, "explore", _GRAPH_FLAGS + ("h", "a_level", "start", "route")))
    return 0


def _cmd_sweep(opt: _Options) -> int:
    family = opt.get("family", "rrg")
    ns = _int_list(opt.require("n"))
    a_raw = opt.get("a_level")
    h_raw = opt.get("h")
    if (a_raw is None) == (h_raw is None):
        raise _UsageError("give exactly one of --h and --A")
    spec = experiments.SweepSpec(
        family=family,
        n_list=tuple(ns),
        trials=opt.get("trials", 10, int),
        master_seed=opt.get("seed", 0, int),
        d=opt.get("d", 3, int),
        a_list=tuple(_float_list(a_raw)) if a_raw is not None else None,
        h_list=tuple(_float_list(h_raw)) if h_raw is not None else None,
        sampler_route=opt.get("route", "auto"),
        timing=opt.get("timing", False, bool),
    )
    rows = experiments.run_sweep(spec, jobs=opt.get("jobs", 1, int))
    csv_text = experiments.sweep_to_csv(rows)
    try:
        cells = experiments.summarize(rows)
    except GffpercError:
        cells = []
    meta = _meta(opt, "sweep",
                 ("family", "n", "d", "h", "a_level", "trials", "seed",
                  "route", "jobs", "timing"))
    out = opt.get("out")
    if out is not None:
        Path(out).write_text(csv_text)
        Path(out + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        summary_path = out + ".summary.json"
        Path(summary_path).write_text(json.dumps({"cells": cells}, indent=2) + "\n")
    else:
        sys.stdout.write(csv_text)
        sys.stderr.write(json.dumps(meta) + "\n")
    if opt.get("pretty", False, bool):
        for cell in cells:
            sys.stdout.write(
                "n=%-6d A=%-8g h=%-10g median cmax %g\n"
                % (cell["n"], cell["A"], cell["h"], cell["cmax_q50"]))
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "gap": _cmd_gap,
    "sample": _cmd_sample,
    "percolate": _cmd_percolate,
    "capacity": _cmd_capacity,
    "explore": _cmd_explore,
    "sweep": _cmd_sweep,
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="gffperc", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in _COMMANDS:
        sp = sub.add_parser(name, help="%s subcommand" % name)
        sp.add_argument("--config", default=None,
                        help="flat key=value file mirroring flag names")
        sp.add_argument("--family", default=None,
                        choices=["rrg", "cycle", "complete", "path", "torus"])
        sp.add_argument("--n", default=None,
                        help="vertex count (comma list for sweep)")
        sp.add_argument("--d", type=int, default=None,
                        help="degree for the rrg family")
        sp.add_argument("--side", type=int, default=None, help="torus side")
        sp.add_argument("--dim", type=int, default=None, help="torus dimension")
        sp.add_argument("--graph", default=None, help="edge-list file path")
        sp.add_argument("--seed", type=int, default=None, help="master seed")
        sp.add_argument("--h", default=None, help="level (comma list for sweep)")
        sp.add_argument("--A", dest="a_level", default=None,
                        help="level in window units h=A*n^(-1/3)")
        sp.add_argument("--k", default=None,
                        help="comma-separated vertex set for capacity")
        sp.add_argument("--start", type=int, default=None,
                        help="start vertex for explore")
        sp.add_argument("--trials", type=int, default=None)
        sp.add_argument("--jobs", type=int, default=None,
                        help="worker processes for sweep")
        sp.add_argument("--out", default=None, help="output file path")
        sp.add_argument("--format", default=None, choices=["csv", "json"])
        sp.add_argument("--route", default=None,
                        choices=["auto", "eigen", "cholesky", "iterative"],
                        help="field sampler route")
        sp.add_argument("--capacity-route", dest="capacity_route", default=None,
                        choices=["green", "green-sum", "dirichlet"])
        sp.add_argument("--timing", action="store_const", const=True,
                        default=None,
                        help="record real wall_ms in sweep rows "
                             "(breaks byte-reproducibility)")
        sp.add_argument("--pretty", action="store_const", const=True,
                        default=None, help="additional human-readable output")
    return parser


_LEVEL_FLAGS = ("--h", "--A")


def _fold_level_values(argv: list[str]) -> list[str]:
    """Fold ``--h -0.5,0.5`` into ``--h=-0.5,0.5``.

    argparse reads a leading ``-`` as a new flag unless the whole token is a
    plain negative number, so comma lists that start negative only work in
    the ``=`` form; rewrite them so both spellings do.
    """
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok in _LEVEL_FLAGS and i + 1 < len(argv)
                and re.match(r"-\.?\d", argv[i + 1])):
            out.append(tok + "=" + argv[i + 1])
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    parser = _build_parser()
    args = sys.argv[1:] if argv is None else list(argv)
    try:
        ns = parser.parse_args(_fold_level_values(args))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[ns.cmd](_Options(ns))
    except _UsageError as exc:
        sys.stderr.write("gffperc %s: error: %s\n" % (ns.cmd, exc))
        return 1
    except GffpercError as exc:
        sys.stderr.write("gffperc %s: %s: %s\n"
                         % (ns.cmd, type(exc).__name__, exc))
        return 2
    except OSError as exc:
        sys.stderr.write("gffperc %s: %s\n" % (ns.cmd, exc))
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
