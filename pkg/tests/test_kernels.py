"""The compiled cluster/bridge kernels and their pure-python twin must agree
bit for bit, so that results never depend on which backend got imported."""

import os
import subprocess
import sys
from collections import deque

import numpy as np
import pytest

from gffperc import _kernels_py, kernels

try:
    from gffperc import _kernels as _compiled
except ImportError:  # pragma: no cover - source-only install
    _compiled = None

needs_compiled = pytest.mark.skipif(_compiled is None,
                                    reason="compiled kernels not built")


def _random_instance(gen, n_max=60):
    n = int(gen.integers(2, n_max))
    m = int(gen.integers(1, 3 * n))
    eu = gen.integers(0, n, size=m).astype(np.int32)
    ev = gen.integers(0, n, size=m).astype(np.int32)
    keep = eu != ev
    eu, ev = eu[keep], ev[keep]
    mask = (gen.random(eu.size) < 0.55).astype(np.uint8)
    return n, eu, ev, mask


def _bfs_components(n, eu, ev, mask):
    adj = {v: [] for v in range(n)}
    for u, v, keep in zip(eu.tolist(), ev.tolist(), mask.tolist()):
        if keep:
            adj[u].append(v)
            adj[v].append(u)
    comp = [-1] * n
    for start in range(n):
        if comp[start] >= 0:
            continue
        comp[start] = start
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if comp[y] < 0:
                    comp[y] = start
                    queue.append(y)
    return comp


def test_cluster_labels_against_bfs():
    gen = np.random.default_rng(2401)
    for _ in range(300):
        n, eu, ev, mask = _random_instance(gen)
        labels = kernels.cluster_labels(n, eu, ev, mask)
        comp = _bfs_components(n, eu, ev, mask)
        # same partition: labels agree iff BFS components agree
        seen = {}
        for v in range(n):
            key = int(labels[v])
            if key in seen:
                assert seen[key] == comp[v]
            else:
                seen[key] = comp[v]
        assert len(seen) == len(set(comp))


def test_cluster_labels_roots_are_members():
    gen = np.random.default_rng(77)
    for _ in range(50):
        n, eu, ev, mask = _random_instance(gen)
        labels = kernels.cluster_labels(n, eu, ev, mask)
        for v in range(n):
            root = int(labels[v])
            assert 0 <= root < n
            assert labels[root] == root  # root labels itself


@needs_compiled
def test_cluster_labels_backends_identical():
    gen = np.random.default_rng(888)
    for _ in range(100):
        n, eu, ev, mask = _random_instance(gen)
        a = _compiled.cluster_labels(n, eu, ev, mask)
        b = _kernels_py.cluster_labels(n, eu, ev, mask)
        assert np.array_equal(np.asarray(a), np.asarray(b))


@needs_compiled
def test_bridge_survival_backends_bitwise_identical():
    gen = np.random.default_rng(3131)
    for trial in range(20):
        runs = int(gen.integers(1, 40))
        steps = int(gen.integers(2, 50))
        normals = gen.standard_normal((runs, steps))
        unif = gen.random(runs)
        a = float(gen.uniform(-0.5, 2.5))
        b = float(gen.uniform(-0.5, 2.5))
        h = 0.0
        for exact in (True, False):
            out_c = np.asarray(_compiled.bridge_survival(
                normals, unif, a, b, h, exact))
            out_p = np.asarray(_kernels_py.bridge_survival(
                normals, unif, a, b, h, exact))
            assert out_c.dtype == np.uint8 and out_p.dtype == np.uint8
            assert np.array_equal(out_c, out_p), (trial, exact, a, b)


def test_bridge_survival_trivial_cases():
    normals = np.zeros((3, 4))
    unif = np.full(3, 0.5)
    # endpoint below the level kills every run outright
    assert kernels.bridge_survival(normals, unif, -1.0, 2.0, 0.0, True).sum() == 0
    assert kernels.bridge_survival(normals, unif, 2.0, -1.0, 0.0, False).sum() == 0
    # flat zero-noise bridge well above the level always survives in grid mode
    out = kernels.bridge_survival(normals, unif, 3.0, 3.0, 0.0, False)
    assert out.tolist() == [1, 1, 1]


def test_backend_module_exports():
    assert kernels.BACKEND in ("cython", "python")
    assert _kernels_py.BACKEND == "python"


def test_pure_python_env_override():
    code = ("import gffperc.kernels as k; print(k.BACKEND)")
    env = dict(os.environ, GFFPERC_PURE_PY="1")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
