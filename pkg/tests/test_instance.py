import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _support import naive_gain_egal, random_instance
from netintervene.errors import DimensionMismatch, ValidationError
from netintervene.instance import (
    Instance,
    InterventionPlan,
    Outcome,
    apply_intervention,
    as_plan,
    correctness,
    error_profile,
    expressed,
    faulty_mass,
    gain_agg_direct,
    gain_egal_direct,
    improvement_table,
)


def _single(preds, label=1, wbar=None):
    preds = np.atleast_2d(preds)
    n = preds.shape[1]
    return Instance([1.0], [label], preds, np.eye(n) if wbar is None else wbar)


class TestConstruction:
    def test_rejects_bad_weights(self):
        with pytest.raises(ValidationError):
            Instance([0.5, 0.4], [1, 1], [[1], [1]], np.eye(1))
        with pytest.raises(ValidationError):
            Instance([1.5, -0.5], [1, 1], [[1], [1]], np.eye(1))

    def test_rejects_bad_symbols(self):
        with pytest.raises(ValidationError):
            _single([[0, 1]])
        with pytest.raises(ValidationError):
            _single([[1, 1]], label=0)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            Instance([1.0], [1], [[1, 1]], np.eye(3))

    def test_is_read_only(self):
        inst = _single([[1, -1]])
        with pytest.raises(ValueError):
            inst.preds[0, 0] = -1

    def test_from_outcomes(self):
        inst = Instance.from_outcomes([Outcome(0.25, 1, [1, -1]), Outcome(0.75, -1, [1, 1])], np.eye(2))
        assert inst.m == 2 and inst.n == 2
        assert inst.outcomes[1].label == -1

    def test_plan_validation(self):
        with pytest.raises(ValidationError):
            InterventionPlan((1, 1))
        with pytest.raises(ValidationError):
            InterventionPlan((0,), phi=0.0)
        with pytest.raises(ValidationError):
            apply_intervention(_single([[1, 1]]), as_plan([5]))


class TestCorrectness:
    def test_identity_network(self):
        inst = _single([[1, -1]])
        np.testing.assert_array_equal(correctness(inst, 0), [1.0, -1.0])
        np.testing.assert_array_equal(expressed(inst, 0), [1.0, -1.0])

    def test_averaging(self):
        inst = _single([[1, -1]], wbar=np.full((2, 2), 0.5))
        np.testing.assert_array_equal(correctness(inst, 0), [0.0, 0.0])

    def test_zero_is_not_faulty(self):
        inst = _single([[1, -1]], wbar=np.full((2, 2), 0.5))
        assert faulty_mass(inst) == 0.0

    def test_bad_outcome_index(self):
        with pytest.raises(IndexError):
            expressed(_single([[1]]), 3)


class TestGains:
    def test_single_fix(self):
        assert gain_egal_direct(_single([[1, -1]]), as_plan([1])) == 1.0

    def test_fixing_correct_agent(self):
        assert gain_egal_direct(_single([[1, -1]]), as_plan([0])) == 0.0

    def test_two_outcomes(self):
        wbar = np.full((2, 2), 0.5)
        inst = Instance([0.5, 0.5], [1, -1], [[-1, -1], [-1, -1]], wbar)
        # only the first outcome is wrong; both agents are faulty there
        assert gain_egal_direct(inst, as_plan([0])) == pytest.approx(1.0)

    def test_partial_correction_counts(self):
        inst = _single([[-1, -1]], wbar=np.full((2, 2), 0.5))
        assert gain_egal_direct(inst, as_plan([0], phi=0.01)) == 2.0

    def test_empty_plan(self):
        rng = np.random.default_rng(0)
        inst = random_instance(rng, 5, 4)
        assert gain_egal_direct(inst, as_plan([])) == 0.0
        assert gain_agg_direct(inst, as_plan([])) == 0.0

    def test_improvement_is_exact_zero_off_support(self):
        rng = np.random.default_rng(1)
        inst = random_instance(rng, 8, 6, density=0.3)
        table = improvement_table(inst, as_plan([2, 5]))
        untouched = inst.wbar[:, [2, 5]].sum(axis=1) == 0
        assert np.all(table[:, untouched] == 0.0)
        assert np.all(table >= 0.0)

    def test_matches_naive_definition(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            inst = random_instance(rng, 6, 5, density=0.6)
            S = list(rng.choice(6, size=int(rng.integers(0, 4)), replace=False))
            phi = float(rng.uniform(0.05, 1.0))
            assert gain_egal_direct(inst, as_plan(S, phi)) == pytest.approx(naive_gain_egal(inst, S, phi), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 9), st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(0.05, 1.0))
def test_egalitarian_set_function_properties(n, m, seed, phi):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n, m, density=0.5)
    perm = rng.permutation(n)
    S = list(perm[: rng.integers(0, n - 1)])
    T = S + list(perm[len(S): len(S) + rng.integers(0, n - len(S))])
    u = int(perm[-1])
    g = lambda X: gain_egal_direct(inst, as_plan(X, phi))
    gs, gt = g(S), g(T)
    assert 0.0 <= gs <= faulty_mass(inst) + 1e-12
    assert gs <= gt + 1e-12
    # diminishing returns only needs u outside T
    if u not in T:
        assert g(S + [u]) - gs >= g(T + [u]) - gt - 1e-12


class TestErrorProfile:
    def test_label_independent_flag(self):
        rng = np.random.default_rng(3)
        prof = error_profile(random_instance(rng, 5, 6, balanced=True))
        assert prof.label_independent
        np.testing.assert_allclose(prof.err_pos, prof.err_neg)
        assert prof.prior_pos == pytest.approx(0.5)

    def test_single_class_warns(self):
        inst = Instance([0.5, 0.5], [1, 1], [[1, -1], [-1, -1]], np.eye(2))
        with pytest.warns(UserWarning):
            prof = error_profile(inst)
        np.testing.assert_allclose(prof.err, [0.5, 1.0])
        assert not prof.label_independent

    def test_overall_rates(self):
        inst = Instance([0.25, 0.75], [1, -1], [[1, 1], [1, -1]], np.eye(2))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            prof = error_profile(inst)
        np.testing.assert_allclose(prof.err, [0.75, 0.0])
        np.testing.assert_allclose(prof.err_pos, [0.0, 0.0])
        np.testing.assert_allclose(prof.err_neg, [1.0, 0.0])
