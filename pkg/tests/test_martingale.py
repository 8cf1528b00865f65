import numpy as np
import pytest

from gffperc import field, graphs, martingale, percolation, potential
from gffperc.errors import BadK, DimensionMismatch
from gffperc.rng import derive_seed

K2 = graphs.gen_named("complete", n=2)
TRI = graphs.gen_named("cycle", n=3)


def _nested_pairs(count, n_max, seed):
    gen = np.random.default_rng(seed)
    out = []
    for trial in range(count):
        n = 2 * int(gen.integers(3, n_max // 2))
        g = graphs.gen_random_regular(n, 3, seed=derive_seed(seed, "np", trial))
        k_small = int(gen.integers(1, n // 3))
        k_big = int(gen.integers(k_small + 1, max(k_small + 2, n - 1)))
        perm = gen.permutation(n)
        inner = sorted(int(x) for x in perm[:k_small])
        outer = sorted(int(x) for x in perm[:min(k_big, n - 1)])
        out.append((g, inner, outer))
    return out


# ---------------------------------------------------------------- coefficients


def test_coefficients_k2_hand_values():
    c = martingale.martingale_coefficients(K2, [0])
    assert np.allclose(c.a, [4.0, 0.0], atol=1e-10)
    assert c.nu == pytest.approx(2.0, abs=1e-12)
    assert c.cap == pytest.approx(4.0, abs=1e-12)
    # variance through the covariance: 16 * Var(phi_0) = 16/4 = 4 = cap
    sigma = field.covariance_matrix(K2).sigma
    assert c.a @ sigma @ c.a == pytest.approx(4.0, abs=1e-10)


def test_coefficients_triangle_bulk_part():
    c = martingale.martingale_coefficients(TRI, [0])
    assert np.allclose(c.a_blk, [1.5, 0.0, 0.0], atol=1e-12)  # nu*deg = 0.75*2
    assert np.allclose(c.a_blk + c.a_bdr, c.a, atol=0)


def test_coefficients_support_mass_sign():
    for g, inner, outer in _nested_pairs(20, 60, seed=3001):
        for k in (inner, outer):
            c = martingale.martingale_coefficients(g, k)
            off = np.setdiff1d(np.arange(g.n), np.asarray(k))
            assert np.all(c.a[off] == 0.0)
            assert c.a.min() > -1e-12
            assert abs(c.a.sum() - c.cap) < 1e-10 * (1.0 + c.cap)
            cap_ref = potential.capacity_green(g, k).cap
            assert abs(c.cap - cap_ref) < 1e-10 * (1.0 + cap_ref)


def test_boundary_part_supported_on_boundary():
    # on a long cycle, interior vertices of an arc have both neighbors
    # inside K, so their boundary coefficient must vanish
    g = graphs.gen_named("cycle", n=12)
    k = [2, 3, 4, 5, 6]
    c = martingale.martingale_coefficients(g, k)
    interior = [3, 4, 5]
    assert np.max(np.abs(c.a_bdr[interior])) < 1e-10
    assert abs(c.a_bdr[2]) > 1e-3 and abs(c.a_bdr[6]) > 1e-3


def test_coefficients_bad_k():
    with pytest.raises(BadK):
        martingale.martingale_coefficients(TRI, [])
    with pytest.raises(BadK):
        martingale.martingale_coefficients(TRI, [0, 1, 2])


# ---------------------------------------------------------------- identities


def test_exact_variance_identity_nested_pairs():
    # Var(M_K) = a^T sigma a = cap, and increments are orthogonal:
    # a_K^T sigma (a_K' - a_K) = 0, Var(M_K' - M_K) = cap' - cap
    for g, inner, outer in _nested_pairs(50, 128, seed=3011):
        sigma = field.covariance_matrix(g).sigma
        ci = martingale.martingale_coefficients(g, inner)
        co = martingale.martingale_coefficients(g, outer)
        var_i = ci.a @ sigma @ ci.a
        var_o = co.a @ sigma @ co.a
        assert abs(var_i - ci.cap) < 1e-8 * ci.cap
        assert abs(var_o - co.cap) < 1e-8 * co.cap
        cross = ci.a @ sigma @ (co.a - ci.a)
        assert abs(cross) < 1e-8 * np.sqrt(var_i * var_o)
        diff = co.a - ci.a
        var_diff = diff @ sigma @ diff
        assert abs(var_diff - (co.cap - ci.cap)) < 1e-8 * (1.0 + co.cap)


def test_evaluate_martingale():
    c = martingale.martingale_coefficients(K2, [0])
    fs = field.make_sampler(K2, "eigen").sample(derive_seed(2, "ev"))
    m, m_blk, m_bdr = martingale.evaluate_martingale(c, fs)
    assert m == pytest.approx(4.0 * fs.phi[0], abs=1e-12)
    assert m == m_blk + m_bdr
    zero = field.FieldSample(phi=np.zeros(2), seed=0, sampler_route="eigen")
    assert martingale.evaluate_martingale(c, zero) == (0.0, 0.0, 0.0)
    wrong = field.FieldSample(phi=np.zeros(3), seed=0, sampler_route="eigen")
    with pytest.raises(DimensionMismatch):
        martingale.evaluate_martingale(c, wrong)


def test_level_bound_check():
    c = martingale.martingale_coefficients(K2, [0])
    for shift in (0.3, 0.0, 2.5):
        h = -0.7
        fs = field.FieldSample(phi=np.array([h + shift, -(h + shift)]),
                               seed=0, sampler_route="eigen")
        assert martingale.level_bound_check(c, fs, h)
    # nonnegative coefficients with mass cap force M >= h*cap whenever
    # phi >= h on K; check across random sets and levels
    gen = np.random.default_rng(733)
    for g, inner, _ in _nested_pairs(10, 40, seed=3021):
        c = martingale.martingale_coefficients(g, inner)
        s = field.make_sampler(g, "eigen")
        for i in range(20):
            fs = s.sample(derive_seed(17, "lb", i))
            h = float(fs.phi[inner].min())  # largest level with K above it
            assert martingale.level_bound_check(c, fs, h)
    del gen


def test_monte_carlo_martingale_regression():
    # increments should be uncorrelated with the current value: the slope
    # of (M_K' - M_K) on M_K over 1e5 samples is 0 within 3 standard errors
    g = graphs.gen_random_regular(24, 3, seed=derive_seed(5, "mcmg"))
    inner = [0, 1, 2]
    outer = [0, 1, 2, 5, 8, 9, 13]
    ci = martingale.martingale_coefficients(g, inner)
    co = martingale.martingale_coefficients(g, outer)
    s = field.make_sampler(g, "eigen")
    n_draws = 100_000
    draws = np.empty((n_draws, g.n))
    for i in range(n_draws):
        draws[i] = s.sample(derive_seed(23, "mcmg", i)).phi
    m_i = draws @ ci.a
    m_diff = draws @ (co.a - ci.a)
    slope = np.cov(m_i, m_diff)[0, 1] / np.var(m_i, ddof=1)
    resid = m_diff - slope * m_i
    se = np.sqrt(np.var(resid, ddof=2) / (n_draws * np.var(m_i, ddof=1)))
    assert abs(slope) < 3.0 * se, (slope, se)
    # and the empirical variances track the capacities at Monte Carlo scale
    assert np.var(m_i, ddof=1) == pytest.approx(ci.cap, rel=0.05)
    assert np.var(m_diff, ddof=1) == pytest.approx(co.cap - ci.cap, rel=0.05)


# ---------------------------------------------------------------- exploration


def _open_all(g):
    return percolation.OpenEdgeSet(h=-1e9, open=np.ones(g.m, dtype=bool), seed=0)


def _open_none(g):
    return percolation.OpenEdgeSet(h=1e9, open=np.zeros(g.m, dtype=bool), seed=0)


def _sample_on(g, label):
    return field.make_sampler(g, "eigen").sample(derive_seed(31, label))


def test_explore_all_open():
    g = graphs.gen_random_regular(16, 3, seed=derive_seed(7, "eo"))
    fs = _sample_on(g, "eo")
    tr = martingale.explore(g, fs, _open_all(g), 0)
    assert tr.start == 0
    assert len(tr.steps) == g.n - 1  # largest-index vertex held out
    assert all(st.cluster_step for st in tr.steps[1:])
    assert all(st.in_cluster for st in tr.steps)
    added = [st.added for st in tr.steps]
    assert added[0] == 0
    assert len(set(added)) == len(added)
    assert g.n - 1 not in added


def test_explore_none_open_complete_graph():
    g = graphs.gen_named("complete", n=7)
    fs = _sample_on(g, "en")
    tr = martingale.explore(g, fs, _open_none(g), 2)
    added = [st.added for st in tr.steps]
    # jump steps pick the smallest unexplored neighbor: index order, start first
    assert added == [2, 0, 1, 3, 4, 5]
    assert not any(st.cluster_step for st in tr.steps[1:])
    assert all(not st.in_cluster for st in tr.steps[1:])
    assert tr.steps[0].in_cluster


def test_explore_none_open_cycle_order():
    g = graphs.gen_named("cycle", n=6)
    fs = _sample_on(g, "ec")
    tr = martingale.explore(g, fs, _open_none(g), 3)
    added = [st.added for st in tr.steps]
    # neighbors of {3} are {2,4}; of {2,3} are {1,4}; of {1,2,3} are {0,4} ...
    assert added == [3, 2, 1, 0, 4]


def test_explore_trace_invariants():
    for trial in range(10):
        g = graphs.gen_random_regular(20, 3, seed=derive_seed(11, "ti", trial))
        fs = field.make_sampler(g, "eigen").sample(derive_seed(12, "ti", trial))
        o = percolation.percolate(g, fs, 0.0, derive_seed(13, "ti", trial))
        tr = martingale.explore(g, fs, o, 0)
        qs = [st.q for st in tr.steps]
        assert qs[0] == 0.0
        assert all(a <= b + 1e-12 for a, b in zip(qs, qs[1:]))
        assert len({st.added for st in tr.steps}) == len(tr.steps)
        # m values recompute from scratch at a couple of prefixes
        for i in (0, len(tr.steps) // 2, len(tr.steps) - 1):
            k_i = tr.k_at(i)
            c = martingale.martingale_coefficients(g, k_i)
            m, m_blk, m_bdr = martingale.evaluate_martingale(c, fs)
            assert tr.steps[i].m == pytest.approx(m, abs=1e-9)
            assert tr.steps[i].m_blk == pytest.approx(m_blk, abs=1e-9)
            assert tr.steps[i].q == pytest.approx(c.cap - tr_cap0(tr, g),
                                                  abs=1e-8)


def tr_cap0(tr, g):
    return martingale.martingale_coefficients(g, [tr.start]).cap


def test_explore_increment_orthogonality_along_prefixes():
    g = graphs.gen_random_regular(18, 3, seed=derive_seed(3, "orth"))
    fs = _sample_on(g, "orth")
    o = percolation.percolate(g, fs, -0.2, derive_seed(4, "orth"))
    tr = martingale.explore(g, fs, o, 0)
    sigma = field.covariance_matrix(g).sigma
    picks = [(0, 3), (1, 8), (4, 12), (0, len(tr.steps) - 1)]
    for i, j in picks:
        ci = martingale.martingale_coefficients(g, tr.k_at(i))
        cj = martingale.martingale_coefficients(g, tr.k_at(j))
        cross = ci.a @ sigma @ (cj.a - ci.a)
        scale = np.sqrt(ci.cap * cj.cap)
        assert abs(cross) < 1e-8 * scale


def test_explore_holdout_adjusts_for_last_start():
    g = graphs.gen_named("complete", n=5)
    fs = _sample_on(g, "ho")
    tr = martingale.explore(g, fs, _open_all(g), 4)
    added = [st.added for st in tr.steps]
    assert added[0] == 4
    assert len(added) == 4
    assert 3 not in added  # next-largest index becomes the holdout


def test_explore_through_cut_vertex_holdout():
    # star with the hub as holdout candidate: every leaf-to-leaf route runs
    # through the held-out hub, exercising the jump fallback
    g = graphs.build_from_edge_list("0 4\n1 4\n2 4\n3 4\n")
    fs = field.make_sampler(g, "eigen").sample(derive_seed(9, "star"))
    tr = martingale.explore(g, fs, _open_none(g), 0)
    added = [st.added for st in tr.steps]
    assert added == [0, 1, 2, 3]  # hub 4 held out, leaves in index order


def test_time_change_and_csv():
    g = graphs.gen_named("cycle", n=5)
    fs = _sample_on(g, "csv")
    tr = martingale.explore(g, fs, _open_none(g), 0)
    pairs = martingale.time_change(tr)
    assert pairs[0] == (0.0, tr.steps[0].m)
    assert [p[0] for p in pairs] == [st.q for st in tr.steps]
    text = martingale.trace_to_csv(tr)
    lines = text.splitlines()
    assert lines[0] == "step,added_vertex,cluster_step,q,m,m_blk,m_bdr"
    assert len(lines) == 1 + len(tr.steps)
    first = lines[1].split(",")
    assert first[0] == "0" and first[1] == "0" and first[3] == "0.0"
