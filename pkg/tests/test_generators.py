import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netintervene.aggregate import top_k
from netintervene.egal_exact import greedy_egal_exact
from netintervene.egal_group import GroupStructure
from netintervene.egal_ind import greedy_egal_appx_ind
from netintervene.errors import ValidationError
from netintervene.generators import (
    GraphSpec,
    InstanceSpec,
    adversarial_fixture,
    gen_graph,
    gen_group_instance,
    gen_instance,
    influence_from_graph,
)
from netintervene.harness import baseline_order, error_profile_quiet
from netintervene.instance import as_plan, error_profile, gain_egal_direct
from netintervene.io import matrix_to_csv


def _edges(adj):
    return int(np.triu(adj != 0, 1).sum())


class TestGraphs:
    def test_er_extremes(self):
        assert _edges(gen_graph(GraphSpec("ER", n=10, p=0.0))) == 0
        full = gen_graph(GraphSpec("ER", n=4, p=1.0))
        assert _edges(full) == 6
        np.testing.assert_array_equal(np.diag(full), 0)

    def test_er_edge_count_within_four_sigma(self):
        n, p = 200, 0.05
        pairs = n * (n - 1) / 2
        for seed in range(5):
            count = _edges(gen_graph(GraphSpec("ER", n=n, p=p, seed=seed)))
            assert abs(count - pairs * p) <= 4 * math.sqrt(pairs * p * (1 - p))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(6, 60), st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_pa_edge_count_exact(self, n, m, seed):
        adj = gen_graph(GraphSpec("PA", n=n, m=m, seed=seed))
        assert _edges(adj) == math.comb(m, 2) + m * (n - m)
        np.testing.assert_array_equal(adj, adj.T)

    def test_ws_keeps_edge_count(self):
        n, k = 50, 6
        for p in (0.0, 0.25, 1.0):
            adj = gen_graph(GraphSpec("WS", n=n, k_ring=k, p_rewire=p, seed=3))
            assert _edges(adj) == n * (k // 2)
            np.testing.assert_array_equal(adj, adj.T)
            assert np.all(np.diag(adj) == 0)

    def test_ws_without_rewiring_is_a_ring(self):
        adj = gen_graph(GraphSpec("WS", n=8, k_ring=2, p_rewire=0.0))
        for u in range(8):
            assert set(np.flatnonzero(adj[u])) == {(u - 1) % 8, (u + 1) % 8}

    def test_random_w_sparsity_and_rows(self):
        w = gen_graph(GraphSpec("RandomW", n=128, sparsity=0.95, seed=0))
        assert 0.93 <= np.mean(w == 0) <= 0.97
        np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-9)

    @pytest.mark.parametrize("model", ["ER", "PA", "WS", "RandomW"])
    def test_reproducible(self, model):
        a = influence_from_graph(GraphSpec(model, n=40, seed=9))
        b = influence_from_graph(GraphSpec(model, n=40, seed=9))
        assert matrix_to_csv(a) == matrix_to_csv(b)
        c = influence_from_graph(GraphSpec(model, n=40, p=0.2, seed=10))
        assert not np.array_equal(influence_from_graph(GraphSpec(model, n=40, p=0.2, seed=9)), c)

    def test_bad_parameters(self):
        with pytest.raises(ValidationError):
            GraphSpec("ER", p=1.5)
        with pytest.raises(ValidationError):
            GraphSpec("PA", n=3, m=5)
        with pytest.raises(ValueError):
            GraphSpec("nope")

    def test_influence_rows_stochastic(self):
        wbar = influence_from_graph(GraphSpec("PA", n=30, seed=1), steps=3)
        np.testing.assert_allclose(wbar.sum(axis=1), 1.0, atol=1e-12)


class TestInstances:
    def test_always_right(self):
        inst = gen_instance(np.eye(5), InstanceSpec(omega_size=4, p_low=1.0, p_high=1.0, label_prior=1.0))
        assert np.all(inst.labels == 1)
        np.testing.assert_array_equal(error_profile_quiet(inst), 0.0)

    def test_fair_coins(self):
        inst = gen_instance(np.eye(50), InstanceSpec(omega_size=4000, p_low=0.5, p_high=0.5, label_prior=1.0, seed=1))
        err = error_profile_quiet(inst)
        assert abs(err.mean() - 0.5) <= 4 * math.sqrt(0.25 / (4000 * 50))

    def test_class_balanced_profile(self):
        inst = gen_instance(np.eye(6), InstanceSpec(omega_size=5, class_balanced=True, seed=2))
        prof = error_profile(inst)
        assert prof.label_independent
        assert inst.m == 10

    def test_seeded(self):
        spec = InstanceSpec(seed=5)
        a, b = gen_instance(np.eye(7), spec), gen_instance(np.eye(7), spec)
        np.testing.assert_array_equal(a.preds, b.preds)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_bad_spec(self):
        with pytest.raises(ValidationError):
            InstanceSpec(p_low=0.8, p_high=0.2)


class TestGroupInstances:
    def test_no_grouping_means_individual_rates(self):
        n, m = 6, 40_000
        err = np.linspace(0.1, 0.6, n)
        g = GroupStructure(["R", "B", "W", "W", "W", "W"], 0.0, err, 0.9)
        inst = gen_group_instance(np.eye(n), g, m, seed=3)
        emp = error_profile_quiet(inst)
        assert np.all(np.abs(emp - err) <= 4 * np.sqrt(err * (1 - err) / m))

    def test_full_grouping_with_perfect_red(self):
        g = GroupStructure(["R", "R", "B", "W"], 1.0, np.full(4, 0.5), 0.0)
        inst = gen_group_instance(np.eye(4), g, 200, seed=4)
        wrong = inst.wrong
        assert not wrong[:, :2].any()
        assert wrong[:, 2].all()

    def test_red_error_rate_mixture(self):
        m = 100_000
        rho, err_r, e_indv = 0.6, 0.8, 0.2
        g = GroupStructure(["R", "B", "W"], rho, np.full(3, e_indv), err_r)
        inst = gen_group_instance(np.eye(3), g, m, seed=5)
        want = rho * err_r + (1 - rho) * e_indv
        got = inst.wrong[:, 0].mean()
        assert abs(got - want) <= 3 * math.sqrt(want * (1 - want) / m)


class TestAdversarialFixture:
    def test_shared_observables(self):
        a, b = adversarial_fixture(6, 1), adversarial_fixture(6, 2)
        assert matrix_to_csv(a.wbar) == matrix_to_csv(b.wbar)
        assert error_profile_quiet(a).tobytes() == error_profile_quiet(b).tobytes()
        np.testing.assert_array_equal(error_profile_quiet(a)[:4], 0.5)
        np.testing.assert_array_equal(error_profile_quiet(a)[4:], 0.0)

    @pytest.mark.parametrize("n", [1, 5, 50])
    def test_gains_and_greedy(self, n):
        one, two = adversarial_fixture(n, 1), adversarial_fixture(n, 2)
        assert gain_egal_direct(one, as_plan([2])) - n / 2 in (0.0, 0.5)
        assert gain_egal_direct(one, as_plan([0])) <= 0.5
        assert greedy_egal_exact(one, 1)[0].S[0] in (2, 3)
        assert greedy_egal_exact(two, 1)[0].S[0] in (0, 1)

    def test_observable_only_selectors_cannot_tell(self):
        n = 20
        one, two = adversarial_fixture(n, 1), adversarial_fixture(n, 2)
        picks = {
            "Degree": lambda inst: baseline_order("Degree", inst, 1),
            "ErrRate": lambda inst: baseline_order("ErrRate", inst, 1),
            "DegXErr": lambda inst: baseline_order("DegXErr", inst, 1),
            "Appx": lambda inst: list(greedy_egal_appx_ind(inst.wbar, error_profile_quiet(inst), 1)[0].S),
        }
        best1 = gain_egal_direct(one, greedy_egal_exact(one, 1)[0])
        best2 = gain_egal_direct(two, greedy_egal_exact(two, 1)[0])
        for name, pick in picks.items():
            s1, s2 = pick(one), pick(two)
            assert s1 == s2, name
            gap = max(best1 - gain_egal_direct(one, as_plan(s1)), best2 - gain_egal_direct(two, as_plan(s2)))
            assert gap >= n / 2 - 1 / 2, name

    def test_bad_variant(self):
        with pytest.raises(ValidationError):
            adversarial_fixture(3, 3)


def test_top_k_used_by_baselines_is_stable():
    assert top_k(np.zeros(4), 2) == [0, 1]
