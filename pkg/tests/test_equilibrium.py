import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irir.dynamics import KRateParams, RateParams
from irir.equilibrium import (
    Regime,
    equilibrium2,
    equilibrium_k,
    mean_field_derivatives,
    mean_field_derivatives_k,
    subset_objective,
    surviving_set,
    threshold_classify,
)
from irir.errors import CapacityError


def weak(w, rho=None):
    """KRateParams with the given weakness scores (rho / lambda_eff)."""
    rho = rho or [1.0] * len(w)
    return KRateParams(tuple(r / x for r, x in zip(rho, w)), tuple(rho))


def brute_surviving(w, n):
    best = None
    for size in range(2, len(w) + 1):
        for S in itertools.combinations(range(len(w)), size):
            obj = sum(w[i] for i in S) / (size - 1)
            if best is None or obj < best[0] - 1e-12 * abs(obj) or (
                abs(obj - best[0]) <= 1e-12 * abs(obj) and size > len(best[1])
            ):
                best = (obj, S)
    return None if best[0] >= n else best[1]


class TestTwo:
    def test_symmetric(self):
        eq = equilibrium2(RateParams.from_effective(0.01, 0.01, 1.0, 1.0), 1000)
        assert (eq.R1_star, eq.R2_star, eq.I1_star, eq.I2_star) == (100.0, 100.0, 400.0, 400.0)

    def test_asymmetric_example(self):
        params = RateParams.from_effective(0.01, 0.01, 1.0, 2.0)
        eq = equilibrium2(params, 1000)
        assert eq.R1_star == pytest.approx(200)
        assert eq.R2_star == pytest.approx(100)
        assert eq.I1_star == pytest.approx(1400 / 3)
        assert eq.I2_star == pytest.approx(700 / 3)
        d = mean_field_derivatives((eq.I1_star, eq.R1_star, eq.I2_star, eq.R2_star), params)
        assert max(map(abs, d)) <= 1e-9 * 1000

    def test_invalid(self):
        assert not equilibrium2(RateParams.from_effective(0.01, 0.01, 1, 1), 100).valid

    def test_density_enters(self):
        eq = equilibrium2(RateParams(0.02, 0.02, 1, 1, density=0.5), 1000)
        assert eq.R1_star == pytest.approx(100)

    def test_hand_derivatives(self):
        d = mean_field_derivatives((10, 5, 3, 7), RateParams.from_effective(0.1, 0.1, 1, 1))
        assert d == pytest.approx((-3.0, 8.5, -1.5, -4.0))
        assert mean_field_derivatives((0, 4, 0, 6), RateParams.from_effective(0.1, 0.1, 1, 1)) == (0, 0, 0, 0)

    @settings(max_examples=200, deadline=None)
    @given(st.tuples(*[st.floats(0, 1e5)] * 4), st.tuples(*[st.floats(1e-6, 10)] * 4))
    def test_derivatives_conserve(self, state, rates):
        d = mean_field_derivatives(state, RateParams.from_effective(*rates))
        scale = max(1.0, max(abs(x) for x in d))
        assert abs(sum(d)) <= 1e-12 * scale

    @settings(max_examples=200, deadline=None)
    @given(st.floats(100, 1e5), st.tuples(*[st.floats(0.1, 10)] * 4), st.floats(0.01, 0.99))
    def test_valid_equilibrium_positive(self, n, scale, frac):
        # choose rates so the starred R sum to frac * n
        c1, c2, r1, r2 = scale
        params = RateParams.from_effective(c1, c2, r1, r2)
        s = r1 / c1 + r2 / c2
        params = RateParams.from_effective(c1 * s / (frac * n), c2 * s / (frac * n), r1, r2)
        eq = equilibrium2(params, n)
        assert eq.valid
        vals = (eq.R1_star, eq.R2_star, eq.I1_star, eq.I2_star)
        assert min(vals) > 0
        assert abs(sum(vals) - n) <= 1e-9 * n


class TestThreshold:
    def test_examples(self):
        n = 1000
        sub = threshold_classify(RateParams.from_effective(4 / n, 4 / n, 1, 1), n, 0.25)
        assert sub.regime is Regime.SUBCRITICAL and sub.S == pytest.approx(n / 2)
        sup = threshold_classify(RateParams.from_effective(1 / n, 1 / n, 1, 1), n, 0.25)
        assert sup.regime is Regime.SUPERCRITICAL and sup.S_over_n == pytest.approx(2.0)
        mid = threshold_classify(RateParams.from_effective(2 / n, 2 / n, 1, 1), n, 1e-6)
        assert mid.regime is Regime.MARGINAL


class TestK:
    def test_symmetric_three(self):
        n, w = 1000, 50.0
        eq = equilibrium_k(weak([w, w, w]), n)
        np.testing.assert_allclose(eq.R_star, w / 2)
        assert eq.R_star_total == pytest.approx(3 * w / 2)
        np.testing.assert_allclose(eq.I_star, (n - 1.5 * w) / 3)
        assert eq.feasible and eq.survives.all()

    def test_reduces_to_two(self):
        params = RateParams.from_effective(0.02, 0.005, 1.5, 0.7)
        ek = equilibrium_k(KRateParams.from_rate_params(params), 1000)
        e2 = equilibrium2(params, 1000)
        np.testing.assert_allclose(ek.R_star, [e2.R1_star, e2.R2_star])
        np.testing.assert_allclose(ek.I_star, [e2.I1_star, e2.I2_star])

    def test_weak_third(self):
        eq = equilibrium_k(weak([100, 100, 500], rho=[1.0, 2.0, 0.5]), 2000)
        assert eq.R_star[2] == pytest.approx(-150)
        assert not eq.survives[2] and not eq.feasible

    @settings(max_examples=200, deadline=None)
    @given(st.integers(2, 7).flatmap(lambda k: st.tuples(
        st.lists(st.floats(1, 100), min_size=k, max_size=k),
        st.lists(st.floats(0.1, 5), min_size=k, max_size=k),
    )))
    def test_fixed_point_when_feasible(self, draw):
        w, rho = draw
        n = 10 * sum(w)
        kp = weak(w, rho)
        eq = equilibrium_k(kp, n)
        if not eq.feasible:
            return
        assert abs(eq.I_star.sum() - (n - eq.R_star_total)) <= 1e-9 * n
        for i in range(len(w)):
            assert abs(eq.R_star.sum() - eq.R_star[i] - w[i]) <= 1e-9 * n
        dI, dR = mean_field_derivatives_k(eq.I_star, eq.R_star, kp)
        assert np.max(np.abs(dI)) <= 1e-9 * n and np.max(np.abs(dR)) <= 1e-9 * n
        assert abs(dI.sum() + dR.sum()) <= 1e-9 * n

    @settings(max_examples=200, deadline=None)
    @given(st.integers(3, 7).flatmap(lambda k: st.lists(st.floats(1, 100), min_size=k, max_size=k)))
    def test_positive_share_iff_survival_condition(self, w):
        eq = equilibrium_k(weak(w), 1e9)
        k = len(w)
        for i in range(k):
            cond = w[i] < (sum(w) - w[i]) / (k - 2)
            margin = abs(w[i] - (sum(w) - w[i]) / (k - 2))
            if margin > 1e-9 * sum(w):
                assert (eq.R_star[i] > 0) == cond == bool(eq.survives[i])

    @settings(max_examples=200, deadline=None)
    @given(st.integers(3, 7).flatmap(lambda k: st.lists(st.floats(1, 100), min_size=k, max_size=k)))
    def test_removing_violator_lowers_objective(self, w):
        k = len(w)
        worst = int(np.argmax(w))
        if w[worst] > (sum(w) - w[worst]) / (k - 2) * (1 + 1e-9):
            rest = [i for i in range(k) if i != worst]
            assert subset_objective(w, rest) < subset_objective(w, range(k))


class TestSurvivingSet:
    def test_equal_scores_keep_all(self):
        assert surviving_set(weak([10.0] * 5), 1000).members == (0, 1, 2, 3, 4)

    def test_weak_third_dropped(self):
        best = surviving_set(weak([100, 100, 500]), 1000)
        assert best.members == (0, 1)
        assert best.objective == pytest.approx(200)
        assert subset_objective([100, 100, 500], [0, 1, 2]) == pytest.approx(350)

    def test_none_when_too_weak(self):
        assert surviving_set(weak([600, 600]), 1000).members is None

    def test_capacity(self):
        with pytest.raises(CapacityError):
            surviving_set(weak([1.0] * 21), 100)
        assert surviving_set(weak([1.0] * 21), 100, method="greedy").heuristic

    @settings(max_examples=300, deadline=None)
    @given(st.integers(2, 8).flatmap(lambda k: st.lists(st.floats(1, 1000), min_size=k, max_size=k)))
    def test_brute_matches_oracle(self, w):
        n = 1500.0
        assert surviving_set(weak(w), n).members == brute_surviving(w, n)

    def test_greedy_matches_brute(self):
        # random weakness scores: ties have probability zero, so the two must agree
        rng = np.random.default_rng(0)
        mismatches = []
        for _ in range(10_000):
            k = int(rng.integers(2, 11))
            w = rng.uniform(1, 1000, size=k)
            kp = weak(list(w))
            a = surviving_set(kp, 1e9)
            b = surviving_set(kp, 1e9, method="greedy")
            if a.members != b.members:
                mismatches.append((w.tolist(), a.members, b.members))
        assert mismatches == []

    def test_greedy_tie_differs(self):
        # removing infection 2 leaves the objective unchanged (R*_2 = 0); brute force prefers the larger set
        w = [1.0, 1.0, 2.0]
        assert surviving_set(weak(w), 100).members == (0, 1, 2)
        assert surviving_set(weak(w), 100, method="greedy").members == (0, 1)
