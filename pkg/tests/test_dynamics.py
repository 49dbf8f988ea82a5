import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irir.dynamics import (
    CountState,
    EventKind,
    KCountState,
    KRateParams,
    RateParams,
    StopRule,
    VertexAssignment,
    apply_event,
    event_rates,
    k_event_rates,
    make_initial,
    run,
    run_k,
    step,
)
from irir.errors import InvalidInputError
from irir.graph import ExplicitGraph, PerfectlyMixed, complete_graph, generate_erdos_renyi
from irir.rng import make_rng

UNIT = RateParams(1.0, 1.0, 1.0, 1.0)


def counts_from_labels(labels):
    return tuple(int((labels == c).sum()) for c in range(4))


def edge_weight_between(g, labels, a, b):
    la, lb = labels[g.u], labels[g.v]
    return float(g.w[((la == a) & (lb == b)) | ((la == b) & (lb == a))].sum())


class TestRates:
    def test_three_vertex_example(self):
        assert event_rates(CountState(1, 0, 1, 1), UNIT) == (1.0, 1.0, 0.0, 1.0, 3.0)

    def test_absorbed_rates_vanish(self):
        assert event_rates(CountState(0, 4, 0, 6), UNIT) == (0.0, 0.0, 0.0, 0.0, 0.0)

    def test_bad_params(self):
        with pytest.raises(InvalidInputError):
            RateParams(0.0, 1.0, 1.0, 1.0)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32), st.sampled_from([0.25, 0.5, 1.0]))
    def test_clique_matches_mixed(self, seed, p):
        rng = np.random.default_rng(seed)
        n = 12
        labels = rng.integers(0, 4, size=n)
        params = RateParams(0.7, 1.3, 0.9, 2.1)
        va = VertexAssignment(complete_graph(n, weight=p), labels)
        count = CountState(*counts_from_labels(labels))
        assert event_rates(va, params) == event_rates(count, params, PerfectlyMixed(n, p))

    def test_weighted_graph_rates(self):
        g = ExplicitGraph(4, [(0, 3, 2.0), (2, 1, 0.5), (0, 1, 7.0)])
        va = VertexAssignment(g, [0, 1, 2, 3])
        params = RateParams(3.0, 5.0, 1.0, 2.0)
        assert event_rates(va, params) == (6.0, 1.0, 2.5, 2.0, 11.5)


class TestStep:
    def test_recover1(self):
        assert apply_event(CountState(5, 2, 3, 0), EventKind.RECOVER1) == CountState(4, 3, 3, 0)

    def test_absorbed(self):
        assert step(CountState(0, 3, 0, 2), UNIT, PerfectlyMixed(5), make_rng(0)) is None

    def test_channel_frequencies(self):
        state = CountState(1, 0, 1, 1)
        rng = make_rng(11)
        draws = 100_000
        counts = np.zeros(4)
        dts = np.empty(draws)
        for i in range(draws):
            ev, _ = step(state, UNIT, PerfectlyMixed(3), rng)
            counts[ev.kind] += 1
            dts[i] = ev.time
        probs = np.array([1, 1, 0, 1]) / 3
        sd = np.sqrt(draws * probs * (1 - probs))
        assert counts[2] == 0
        assert np.all(np.abs(counts - draws * probs) <= 4 * sd + 1e-9)
        se = dts.std(ddof=1) / math.sqrt(draws)
        assert abs(dts.mean() - 1 / 3) <= 3 * se

    def test_asymmetric_frequencies(self):
        state = CountState(3, 4, 2, 5)
        params = RateParams(0.2, 0.7, 1.5, 0.4)
        r = np.array(event_rates(state, params)[:4])
        probs = r / r.sum()
        rng = make_rng(5)
        draws = 100_000
        counts = np.bincount([step(state, params, None, rng)[0].kind for _ in range(draws)], minlength=4)
        sd = np.sqrt(draws * probs * (1 - probs))
        assert np.all(np.abs(counts - draws * probs) <= 4 * sd)

    def test_vertex_target_distribution(self):
        # vertex 3 (R2) has I1 pressure 1, vertex 4 (R2) has 3; Infect1 is the only channel besides recovery
        g = ExplicitGraph(5, [(0, 3), (0, 4, 2.0), (1, 4)])
        base = VertexAssignment(g, [0, 0, 1, 3, 3])
        params = RateParams(1.0, 1.0, 1e-9, 1.0)
        rng = make_rng(3)
        hits = np.zeros(5)
        infections = 0
        for _ in range(20_000):
            va = base.copy()
            ev, _ = step(va, params, g, rng)
            if ev.kind == EventKind.INFECT1:
                infections += 1
                hits[ev.vertex] += 1
        frac = hits[4] / infections
        sd = math.sqrt(0.75 * 0.25 / infections)
        assert abs(frac - 0.75) <= 4 * sd
        assert hits[:3].sum() == 0


class TestMakeInitial:
    def test_even(self):
        assert make_initial(100, 0.25, 0.5) == CountState(25, 25, 25, 25)

    def test_rounding(self):
        s = make_initial(101, 0.25, 0.5)
        assert s == CountState(25, 26, 25, 25)
        assert s.n == 101

    def test_too_large(self):
        with pytest.raises(InvalidInputError):
            make_initial(10, 0.6, 0.5)


class TestRun:
    def test_already_absorbed(self):
        tr = run(PerfectlyMixed(10), UNIT, CountState(0, 4, 0, 6), StopRule(t_max=10))
        assert tr.survival_time == 0.0
        assert not tr.censored
        assert tr.event_count == 0

    def test_deep_supercritical_dies_quickly(self):
        n = 50
        params = RateParams.from_effective(0.5 / n, 0.5 / n, 1.0, 1.0)  # S = 4n
        for r in range(100):
            tr = run(PerfectlyMixed(n), params, make_initial(n, 0.25, 0.5), StopRule(), seed=r, record=False)
            assert not tr.censored
            assert math.isfinite(tr.survival_time)
            assert tr.event_count <= 2000

    def test_determinism(self):
        args = (PerfectlyMixed(300), RateParams.from_effective(3 / 300, 3 / 300, 1, 1), make_initial(300, 0.2, 0.5))
        a = run(*args, StopRule(t_max=50), stride=7, seed=42)
        b = run(*args, StopRule(t_max=50), stride=7, seed=42)
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.counts, b.counts)
        assert a.metadata() == b.metadata()

    def test_censoring(self):
        params = RateParams.from_effective(4 / 200, 4 / 200, 1, 1)
        tr = run(PerfectlyMixed(200), params, make_initial(200, 0.25, 0.5), StopRule(t_max=5.0))
        assert tr.censored and tr.censor_reason == "t_max"
        assert tr.survival_time == 5.0
        tr = run(PerfectlyMixed(200), params, make_initial(200, 0.25, 0.5), StopRule(max_events=1234), stride=100)
        assert tr.censored and tr.censor_reason == "max_events"
        assert tr.event_count == 1234

    def test_stride_rows(self):
        params = RateParams.from_effective(4 / 200, 4 / 200, 1, 1)
        tr = run(PerfectlyMixed(200), params, make_initial(200, 0.25, 0.5), StopRule(max_events=1050), stride=100)
        assert tr.event_counts.tolist() == list(range(0, 1100, 100)) + [1050]
        assert np.all(np.diff(tr.times) >= 0)
        assert tr.columns() == ["t", "I1", "R1", "I2", "R2", "event_count"]

    @settings(max_examples=25, deadline=None)
    @given(
        st.integers(10, 200),
        st.floats(0.2, 6.0),
        st.floats(0.2, 6.0),
        st.floats(0.3, 3.0),
        st.integers(0, 2**32),
    )
    def test_conservation(self, n, c1, c2, rho, seed):
        params = RateParams.from_effective(c1 / n, c2 / n, rho, 1.0)
        tr = run(PerfectlyMixed(n), params, make_initial(n, 0.2, 0.3), StopRule(max_events=3000), stride=1, seed=seed)
        assert np.all(tr.counts.sum(axis=1) == n)
        assert np.all(tr.counts >= 0)
        assert np.all(np.abs(np.diff(tr.counts, axis=0)).sum(axis=1) == 2)
        if not tr.censored:
            last = tr.counts[-1]
            assert last[0] == 0 and last[2] == 0


class TestVertexEngine:
    def test_cache_exact_after_many_events(self):
        g = generate_erdos_renyi(300, 0.08, seed=1)
        params = RateParams(4 / (300 * g.density), 4 / (300 * g.density), 1, 1)
        tr = run(g, params, make_initial(300, 0.25, 0.5), StopRule(max_events=10_000), seed=4)
        assert tr.event_count == 10_000
        va = tr.extra["final_assignment"]
        assert tuple(va.cache) == va.recompute_edge_weights()
        labels = va.labels
        assert va.edge_weights == (edge_weight_between(g, labels, 0, 3), edge_weight_between(g, labels, 2, 1))
        assert tuple(va.counts) == counts_from_labels(labels)

    def test_integer_weights_exact(self):
        rng = np.random.default_rng(0)
        base = generate_erdos_renyi(150, 0.1, seed=2)
        g = ExplicitGraph.from_arrays(base.n, base.u, base.v, rng.integers(1, 5, size=base.num_edges))
        params = RateParams(0.01, 0.01, 1, 1)
        tr = run(g, params, make_initial(150, 0.25, 0.5), StopRule(max_events=10_000), seed=8)
        va = tr.extra["final_assignment"]
        assert tuple(va.cache) == va.recompute_edge_weights()

    def test_fractional_weights_close(self):
        rng = np.random.default_rng(1)
        base = generate_erdos_renyi(150, 0.1, seed=3)
        g = ExplicitGraph.from_arrays(base.n, base.u, base.v, rng.random(base.num_edges))
        params = RateParams(0.05, 0.05, 1, 1)
        tr = run(g, params, make_initial(150, 0.25, 0.5), StopRule(max_events=10_000), seed=8)
        va = tr.extra["final_assignment"]
        np.testing.assert_allclose(va.cache, va.recompute_edge_weights(), rtol=1e-9, atol=1e-9)

    def test_determinism_and_counts(self):
        g = generate_erdos_renyi(100, 0.2, seed=5)
        params = RateParams(0.2, 0.2, 1, 1)
        a = run(g, params, make_initial(100, 0.25, 0.5), StopRule(max_events=2000), stride=1, seed=3)
        b = run(g, params, make_initial(100, 0.25, 0.5), StopRule(max_events=2000), stride=1, seed=3)
        assert np.array_equal(a.counts, b.counts) and np.array_equal(a.times, b.times)
        assert np.all(a.counts.sum(axis=1) == 100)

    def test_absorbing_is_trap(self):
        g = complete_graph(5)
        va = VertexAssignment(g, [1, 1, 3, 3, 3])
        assert step(va, UNIT, g, make_rng(0)) is None
        assert va.labels.tolist() == [1, 1, 3, 3, 3]

    def test_clique_survival_matches_count_engine(self):
        # same law on both engines: compare mean absorption times (supercritical, n = 40)
        n, p = 40, 0.5
        params = RateParams(0.5 / (n * p), 0.5 / (n * p), 1, 1)
        g = complete_graph(n, weight=p)
        init = make_initial(n, 0.25, 0.5)
        reps = 400
        tv = np.array([run(g, params, init, StopRule(), seed=s, record=False).survival_time for s in range(reps)])
        tc = np.array(
            [run(PerfectlyMixed(n, p), params, init, StopRule(), seed=s + 10**6, record=False).survival_time
             for s in range(reps)]
        )
        se = math.sqrt(tv.var(ddof=1) / reps + tc.var(ddof=1) / reps)
        assert abs(tv.mean() - tc.mean()) <= 4 * se


class TestKEngine:
    def test_channel_enumeration(self):
        rates, total = k_event_rates(KCountState((1, 1, 1), (1, 1, 1)), KRateParams((1, 1, 1), (1, 1, 1)))
        assert len(rates) == 9 and total == 9.0

    def test_absorbed(self):
        tr = run_k(3, KRateParams((1, 1, 1), (1, 1, 1)), KCountState((0, 0, 0), (2, 2, 2)), StopRule(t_max=1))
        assert tr.survival_time == 0.0 and not tr.censored

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.5, 6.0), st.floats(0.5, 6.0), st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.integers(0, 2**32))
    def test_two_infections_reduce_exactly(self, c1, c2, r1, r2, seed):
        n = 120
        params = RateParams.from_effective(c1 / n, c2 / n, r1, r2)
        init = make_initial(n, 0.2, 0.4)
        stop = StopRule(max_events=5000)
        a = run(PerfectlyMixed(n), params, init, stop, stride=1, seed=seed)
        b = run_k(2, KRateParams.from_rate_params(params), KCountState.from_count_state(init), stop, stride=1, seed=seed)
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.counts, b.counts[:, [0, 1, 2, 3]])
        assert a.survival_time == b.survival_time and a.censored == b.censored

    def test_k_conservation_and_extinction(self):
        kp = KRateParams((3 / 300, 3 / 300, 1 / 300), (1, 1, 1))
        init = KCountState((50, 50, 50), (50, 50, 50))
        tr = run_k(3, kp, init, StopRule(t_max=200), stride=1, seed=1, avg_start=100)
        assert np.all(tr.counts.sum(axis=1) == 300)
        ext = tr.extra["extinction_times"]
        for i, t in enumerate(ext):
            I = tr.counts[:, 2 * i]
            if t is None:
                assert np.all(I > 0)
            else:
                first = np.flatnonzero(I == 0)[0]
                assert tr.times[first] == t
        assert tr.extra["avg_I"] is not None and len(tr.extra["avg_I"]) == 3
