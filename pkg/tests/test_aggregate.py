import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _support import naive_gain_agg, random_instance
from netintervene.aggregate import (
    agg_perturbation_bound,
    gain_agg_closed,
    influence_scores,
    select_top_k_agg,
    top_k,
)
from netintervene.errors import DimensionMismatch, ValidationError
from netintervene.instance import as_plan, error_profile, gain_agg_direct


def test_uniform_influence_scores():
    np.testing.assert_allclose(influence_scores(np.full((2, 2), 0.5), [0.5, 0.0]), [0.5, 0.0])


def test_identity_scores_equal_error_rates():
    err = np.array([0.1, 0.7, 0.3])
    np.testing.assert_allclose(influence_scores(np.eye(3), err), err)
    assert select_top_k_agg(np.eye(3), err, 1).S == (1,)


def test_ties_prefer_smaller_index():
    assert top_k([0.3, 0.5, 0.5, 0.1], 2) == [1, 2]
    assert top_k([1.0, 1.0, 1.0], 1) == [0]


def test_bad_budget():
    with pytest.raises(ValidationError):
        select_top_k_agg(np.eye(3), [0.1, 0.2, 0.3], 4)
    with pytest.raises(DimensionMismatch):
        influence_scores(np.eye(3), [0.1, 0.2])


def test_closed_form_matches_direct_on_balanced_instances():
    rng = np.random.default_rng(0)
    for _ in range(30):
        inst = random_instance(rng, 7, 4, balanced=True)
        err = error_profile(inst).err
        S = list(rng.choice(7, size=3, replace=False))
        phi = float(rng.uniform(0.1, 1.0))
        direct = gain_agg_direct(inst, as_plan(S, phi))
        assert direct == pytest.approx(gain_agg_closed(inst.wbar, err, S, phi), abs=1e-12)
        assert direct == pytest.approx(naive_gain_agg(inst, S, phi), abs=1e-12)


def test_closed_form_holds_without_label_balance():
    # y * (y - yhat) = 2 * [yhat != y] for any label distribution
    rng = np.random.default_rng(1)
    for _ in range(30):
        inst = random_instance(rng, 6, 5)
        err = inst.weights @ inst.wrong
        S = list(rng.choice(6, size=2, replace=False))
        assert gain_agg_direct(inst, as_plan(S)) == pytest.approx(gain_agg_closed(inst.wbar, err, S), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1), st.data())
def test_top_k_is_optimal(n, seed, data):
    rng = np.random.default_rng(seed)
    wbar = rng.random((n, n)) * (rng.random((n, n)) < 0.5)
    err = rng.random(n)
    k = data.draw(st.integers(1, n))
    best = max(gain_agg_closed(wbar, err, T) for T in itertools.combinations(range(n), k))
    chosen = select_top_k_agg(wbar, err, k)
    assert gain_agg_closed(wbar, err, chosen.S) >= best - 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1), st.floats(0.01, 100.0))
def test_selection_is_scale_invariant(n, seed, c):
    rng = np.random.default_rng(seed)
    wbar = rng.random((n, n))
    err = rng.random(n)
    k = max(1, n // 2)
    assert select_top_k_agg(c * wbar, err, k).S == select_top_k_agg(wbar, err, k).S


def test_perturbation_bound_holds():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n, k = 10, 3
        wbar = rng.random((n, n)) * (rng.random((n, n)) < 0.5)
        noisy = np.clip(wbar + rng.normal(0, 0.05, size=(n, n)), 0, None)
        err = rng.random(n)
        opt = gain_agg_closed(wbar, err, select_top_k_agg(wbar, err, k).S)
        got = gain_agg_closed(wbar, err, select_top_k_agg(noisy, err, k).S)
        report = agg_perturbation_bound(wbar, noisy, err, k)
        assert report.stated_bound == pytest.approx(report.bound / 2)
        assert opt - got <= report.bound + 1e-12


def test_perturbation_report_fields():
    report = agg_perturbation_bound(np.eye(2), np.full((2, 2), 0.5), [0.5, 0.5], k=1, phi=0.5)
    assert report.epsilon == pytest.approx(1.0)
    assert report.bound == pytest.approx(2.0)
    assert report.stated_bound == pytest.approx(2.0)
