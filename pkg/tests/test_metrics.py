import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drifteval.errors import UndefinedMetricError
from drifteval.metrics import aggregate_seeds, auprc, auroc, compute_metrics, thresholded_metrics

from oracles import confusion_metrics, pairwise_auroc, random_scores_with_ties, sweep_auprc


def test_auroc_perfect_ranking():
    assert auroc([0.9, 0.1], [1, 0]) == 1.0


def test_auroc_all_tied_is_half():
    assert auroc([0.3] * 6, [1, 0, 1, 0, 0, 1]) == 0.5


def test_auroc_single_class_raises():
    with pytest.raises(UndefinedMetricError):
        auroc([0.1, 0.2], [1, 1])


def test_auroc_matches_pairwise_oracle_on_25_points():
    rng = np.random.default_rng(7)
    s, y = random_scores_with_ties(rng, 25)
    assert abs(auroc(s, y) - pairwise_auroc(s, y)) < 1e-12


labelled = st.integers(2, 30).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 6).map(lambda v: v / 6), min_size=n, max_size=n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n),
)).filter(lambda t: 0 < sum(t[1]) < len(t[1]))


@settings(max_examples=150, deadline=None)
@given(labelled)
def test_auroc_property_vs_oracle_and_complement(data):
    s, y = data
    a = auroc(s, y)
    assert abs(a - pairwise_auroc(s, y)) < 1e-12
    assert abs(a + auroc(s, [1 - v for v in y]) - 1) < 1e-12
    assert 0 <= a <= 1


@settings(max_examples=60, deadline=None)
@given(labelled)
def test_auroc_invariant_under_increasing_transform(data):
    s, y = data
    s = np.asarray(s)
    assert auroc(np.exp(3 * s) - 2, y) == pytest.approx(auroc(s, y), abs=1e-12)


def test_auprc_perfect_ranking_is_one():
    assert auprc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0


def test_auprc_all_tied_equals_prevalence():
    assert auprc([0.5] * 8, [1, 0, 0, 1, 0, 0, 0, 1]) == pytest.approx(3 / 8, abs=1e-15)


def test_auprc_zero_positives_raises():
    with pytest.raises(UndefinedMetricError):
        auprc([0.1, 0.3], [0, 0])


def test_auprc_matches_sweep_oracle_on_20_points():
    rng = np.random.default_rng(11)
    s, y = random_scores_with_ties(rng, 20)
    assert abs(auprc(s, y) - sweep_auprc(list(s), list(y))) < 1e-12


@settings(max_examples=100, deadline=None)
@given(labelled)
def test_auprc_property_vs_sweep(data):
    s, y = data
    v = auprc(s, y)
    assert abs(v - sweep_auprc(s, y)) < 1e-12
    assert 0 <= v <= 1


def test_thresholded_all_correct():
    assert thresholded_metrics([0.9, 0.8, 0.1], [1, 1, 0]) == (1.0, 1.0, 1.0)


def test_thresholded_no_predicted_positives():
    acc, rec, f1 = thresholded_metrics([0.1, 0.2, 0.3], [1, 0, 1])
    assert (rec, f1) == (0.0, 0.0)
    assert acc == pytest.approx(1 / 3)


def test_thresholded_matches_confusion_oracle():
    rng = np.random.default_rng(3)
    s = rng.random(30)
    s[:3] = 0.5  # boundary counts as positive
    y = rng.integers(0, 2, 30)
    assert thresholded_metrics(s, y) == confusion_metrics(s, y)


def test_compute_metrics_marks_undefined_as_nan():
    vals = {m.name: m for m in compute_metrics([0.2, 0.7], [0, 0])}
    assert np.isnan(vals["auroc"].value) and np.isnan(vals["auprc"].value)
    assert vals["accuracy"].value == 0.5
    assert vals["auroc"].n == 2 and vals["auroc"].n_pos == 0


def test_aggregate_constant():
    mean, std = aggregate_seeds([0.8] * 5)
    assert mean == pytest.approx(0.8, abs=1e-15) and std == pytest.approx(0.0, abs=1e-15)


def test_aggregate_two_point():
    assert aggregate_seeds([0, 1]) == (0.5, 0.5)


def test_aggregate_singleton_and_empty():
    assert aggregate_seeds([0.3]) == (0.3, 0.0)
    with pytest.raises(ValueError):
        aggregate_seeds([])


def test_aggregate_matches_moments():
    v = np.random.default_rng(0).random(5)
    mean = sum(v) / 5
    var = sum((x - mean) ** 2 for x in v) / 5
    m, s = aggregate_seeds(v)
    assert abs(m - mean) < 1e-12 and abs(s - var ** 0.5) < 1e-12
