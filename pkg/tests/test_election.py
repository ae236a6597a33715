import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from popt import election as el
from popt.errors import DegenerateInputError, DomainError

from oracles import metrics as metrics_ref, nakamoto_bruteforce, simplex_grid_best

seeds = st.integers(0, 2**32 - 1)
FAST = el.GwoConfig(pack_size=20, iterations=80, restarts=2)


def simplex(r, n):
    x = r.exponential(size=n)
    return x / x.sum()


def test_weights_validation():
    with pytest.raises(DomainError):
        el.MetricWeights(0.7, 0.6)
    with pytest.raises(DomainError):
        el.MetricWeights(-0.1, 0.5)
    assert el.MetricWeights(0.2, 0.3).mu3 == pytest.approx(0.5)


def test_gwo_config_validation():
    with pytest.raises(DomainError):
        el.GwoConfig(pack_size=3)
    with pytest.raises(DomainError):
        el.GwoConfig(iterations=0)


def test_applicant_set_clamps_negative_pvs():
    apps = el.ApplicantSet(["a", "b", "c"], [-1.0, 1.0, 3.0])
    np.testing.assert_allclose(apps.shares, [0.0, 0.25, 0.75])
    assert not apps.degenerate
    deg = el.ApplicantSet(["a", "b"], [-1.0, 0.0])
    assert deg.degenerate
    np.testing.assert_allclose(deg.shares, [0.5, 0.5])
    with pytest.raises(DomainError):
        el.ApplicantSet([], [])


def test_fairness_examples():
    assert el.fairness([0.2, 0.8], [0.2, 0.8]) == 1.0
    assert el.fairness([0.5, 0.3, 0.2], [0.4, 0.4, 0.2]) == pytest.approx(1 / 3)
    assert el.fairness([1.0], [1.0]) == 1.0
    with pytest.raises(DomainError):
        el.fairness([0.5, 0.5], [1.0])


def test_decentralization_examples():
    assert el.decentralization([0.25] * 4) == 0.5
    assert el.decentralization([0.6, 0.2, 0.1, 0.1]) == 0.25
    assert el.decentralization([1.0]) == 1.0
    with pytest.raises(DomainError):
        el.decentralization([])


def test_credibility_examples():
    assert el.credibility([1.0, 3.0], [0.0, 1.0]) == pytest.approx(1.5)
    assert el.credibility([0.1, 5.0, 2.0], [1 / 3] * 3) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DegenerateInputError):
        el.credibility([0.0, 0.0], [0.5, 0.5])


def test_comprehensive_examples():
    assert el.comprehensive(0.4, 0.4, 0.4) == pytest.approx(0.4)
    assert el.comprehensive(0.7, 0.1, 0.2, el.MetricWeights(1.0, 0.0)) == pytest.approx(0.7)
    # unweighted harmonic mean, exact rational 27/118
    assert el.comprehensive(0.9, 0.5, 0.1, el.MetricWeights(1 / 3, 1 / 3)) == pytest.approx(27 / 118, abs=1e-12)
    with pytest.raises(DomainError):
        el.comprehensive(0.0, 0.5, 0.5)


@given(seeds, st.integers(1, 9))
def test_fairness_range_and_identity(seed, n):
    r = np.random.default_rng(seed)
    a, p = simplex(r, n), simplex(r, n)
    F = el.fairness(a, p)
    assert 0.0 <= F <= 1.0
    assert el.fairness(a, a) == 1.0


@given(seeds, st.integers(1, 12))
def test_nakamoto_matches_subset_scan(seed, n):
    p = simplex(np.random.default_rng(seed), n)
    assert el.nakamoto_k(p) == nakamoto_bruteforce(list(p))
    assert el.decentralization(p) == pytest.approx(nakamoto_bruteforce(list(p)) / n)


@given(seeds, st.integers(2, 9))
def test_permutation_invariance(seed, n):
    r = np.random.default_rng(seed)
    a, p, pv = simplex(r, n), simplex(r, n), r.random(n) + 0.01
    perm = r.permutation(n)
    assert el.fairness(a, p) == pytest.approx(el.fairness(a[perm], p[perm]))
    assert el.decentralization(p) == el.decentralization(p[perm])
    assert el.credibility(pv, p) == pytest.approx(el.credibility(pv[perm], p[perm]))


@given(seeds, st.integers(1, 20))
def test_uniform_p_gives_unit_credibility(seed, n):
    pv = np.random.default_rng(seed).random(n) + 1e-3
    assert el.credibility(pv, np.full(n, 1 / n)) == pytest.approx(1.0, abs=1e-12)


@given(seeds, st.integers(1, 10))
def test_equal_pvs_give_unit_credibility(seed, n):
    p = simplex(np.random.default_rng(seed), n)
    assert el.credibility(np.full(n, 2.5), p) == pytest.approx(1.0, abs=1e-12)


@given(seeds, st.integers(0, 2))
def test_comprehensive_strictly_increasing(seed, which):
    r = np.random.default_rng(seed)
    m = r.uniform(0.05, 2.0, 3)
    mu1, mu2 = r.uniform(0.05, 0.45, 2)
    w = el.MetricWeights(mu1, mu2)
    bumped = m.copy()
    bumped[which] *= 1.1
    assert el.comprehensive(*bumped, w) > el.comprehensive(*m, w)


@given(seeds, st.integers(2, 8))
def test_metrics_match_reference(seed, n):
    r = np.random.default_rng(seed)
    pv, p = r.random(n) + 0.01, simplex(r, n)
    apps = el.ApplicantSet([str(i) for i in range(n)], pv)
    out = el.evaluate(apps, p, el.MetricWeights(0.3, 0.3))
    F, D, C, O = metrics_ref(list(apps.shares), list(pv), list(p), 0.3, 0.3)
    assert (out.fairness, out.decentralization, out.credibility, out.comprehensive) == pytest.approx((F, D, C, O))


def test_project_simplex():
    X = el.project_simplex([[-1.0, 1.0, 3.0], [-1.0, -2.0, 0.0]])
    np.testing.assert_allclose(X, [[0.0, 0.25, 0.75], [1 / 3, 1 / 3, 1 / 3]])


def test_single_applicant_forced():
    out = el.solve_p1(el.ApplicantSet(["x"], [0.3]))
    assert out.probabilities.tolist() == [1.0]
    assert (out.fairness, out.decentralization, out.credibility, out.comprehensive) == (1, 1, 1, 1)


def test_degenerate_fallback():
    out = el.solve_p1(el.ApplicantSet(["a", "b", "c", "d"], [-1.0, 0.0, -0.5, 0.0]))
    assert out.degenerate
    np.testing.assert_allclose(out.probabilities, 0.25)
    assert out.fairness == 1.0 and out.credibility == 1.0


@given(seeds, st.integers(2, 12))
def test_solution_on_simplex_and_beats_seeds(seed, n):
    r = np.random.default_rng(seed)
    apps = el.ApplicantSet([str(i) for i in range(n)], r.lognormal(size=n))
    w = el.MetricWeights(*r.dirichlet([1, 1, 1])[:2])
    out = el.solve_p1(apps, w, el.GwoConfig(pack_size=8, iterations=20, restarts=1, seed=seed))
    p = out.probabilities
    assert np.all(p >= 0) and abs(p.sum() - 1) < 1e-9
    assert out.comprehensive >= el.evaluate(apps, np.full(n, 1 / n), w).comprehensive - 1e-12
    assert out.comprehensive >= el.evaluate(apps, apps.shares, w).comprehensive - 1e-12
    # reported metrics belong to the returned vector
    again = el.evaluate(apps, p, w)
    assert again.comprehensive == pytest.approx(out.comprehensive, rel=1e-9)


def test_every_iterate_feasible(monkeypatch):
    seen = []
    orig = el._Objective.__call__

    def spy(self, P):
        seen.append(P.copy())
        return orig(self, P)

    monkeypatch.setattr(el._Objective, "__call__", spy)
    apps = el.ApplicantSet(list("abcdef"), [1, 2, 3, 4, 5, 6])
    el.solve_p1(apps, el.MetricWeights(), el.GwoConfig(pack_size=6, iterations=15, restarts=1))
    P = np.vstack(seen)
    assert np.all(P >= 0) and np.allclose(P.sum(axis=1), 1, atol=1e-9)


def test_deterministic_given_seed():
    apps = el.ApplicantSet(list("abcde"), [0.1, 0.5, 0.2, 0.9, 0.4])
    a = el.solve_p1(apps, el.MetricWeights(), FAST)
    b = el.solve_p1(apps, el.MetricWeights(), FAST)
    np.testing.assert_array_equal(a.probabilities, b.probabilities)
    assert a.optimizer_trace == b.optimizer_trace


@given(seeds, st.integers(1, 4))
def test_more_restarts_never_worse(seed, r):
    rng = np.random.default_rng(seed)
    apps = el.ApplicantSet([str(i) for i in range(6)], rng.lognormal(size=6))
    cfg = el.GwoConfig(pack_size=6, iterations=10, restarts=r, seed=seed)
    more = el.GwoConfig(pack_size=6, iterations=10, restarts=r + 1, seed=seed)
    assert el.solve_p1(apps, cfg=more).comprehensive >= el.solve_p1(apps, cfg=cfg).comprehensive


def test_trace_is_monotone_and_exportable():
    apps = el.ApplicantSet(list("abcd"), [1.0, 2.0, 0.5, 0.1])
    out = el.solve_p1(apps, cfg=FAST)
    best = [t[1] for t in out.optimizer_trace]
    assert all(b2 >= b1 for b1, b2 in zip(best, best[1:]))
    buf = io.StringIO()
    out.write_trace(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "iteration,best_O,F,D,C"
    assert len(lines) == len(out.optimizer_trace) + 1


@pytest.mark.parametrize("seed", range(5))
def test_gwo_close_to_grid_optimum_n3(seed):
    pv = list(np.random.default_rng(seed).lognormal(size=3))
    apps = el.ApplicantSet(["a", "b", "c"], pv)
    w = el.MetricWeights()
    grid = simplex_grid_best(pv, 1 / 3, 1 / 3, 0.01)
    got = el.solve_p1(apps, w, el.GwoConfig(seed=seed)).comprehensive
    assert got >= grid * 0.98


def test_equal_pvs_fairness_heavy_optimum_is_uniform():
    apps = el.ApplicantSet(list("abc"), [1.0, 1.0, 1.0])
    w = el.MetricWeights(0.8, 0.1)
    out = el.solve_p1(apps, w, FAST)
    assert out.fairness == pytest.approx(1.0) and out.credibility == pytest.approx(1.0)
    assert out.comprehensive == pytest.approx(simplex_grid_best([1, 1, 1], 0.8, 0.1, 1 / 30), rel=1e-9)
    np.testing.assert_allclose(out.probabilities, 1 / 3, atol=1e-9)


def test_dominant_node_gets_largest_probability_when_credibility_weighted():
    apps = el.ApplicantSet(list("abc"), [10.0, 1.0, 1.0])
    w = el.MetricWeights(0.1, 0.1)
    out = el.solve_p1(apps, w, FAST)
    assert out.probabilities.argmax() == 0
    assert out.probabilities[0] > max(out.probabilities[1:])
