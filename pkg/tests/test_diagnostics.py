import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drifteval.data import FeatureSpec, TemporalDataset
from drifteval.diagnostics import (PANELS, ImportanceMatrix, PrevalenceMatrix, build_report,
                                   coefficient_trajectories, prevalence_trajectories,
                                   read_matrix, read_panel_csv, render_report, select_top_features)
from drifteval.engine import ExperimentConfig, ResultTable, run_experiment
from drifteval.errors import DomainError, RenderError
from drifteval.models import ModelSpec, TrainedModel
from drifteval.regimes import RegimeSpec

from conftest import toy_dataset


def lr_model(cols, coef):
    return TrainedModel("LR", {"C": 1.0}, {"coef": np.array(coef, float), "intercept": np.array(0.0)},
                        list(cols))


def test_trajectory_definition_and_fill():
    imp = coefficient_trajectories({0: lr_model(["a", "b"], [1, -3]),
                                    1: lr_model(["a", "c"], [0.5, 2])})
    assert imp.get("b", 0) == 3.0
    assert imp.get("c", 0) == 0.0 and imp.get("b", 1) == 0.0
    assert imp.features == ["a", "b", "c"] and imp.times == [0, 1]


def test_trajectory_rejects_non_lr():
    m = TrainedModel("GBDT", {}, {"init": np.array(0.0), "trees": []}, ["a"])
    with pytest.raises(DomainError):
        coefficient_trajectories({0: m})


def test_trajectory_matches_serialized_models(tmp_path):
    rng = np.random.default_rng(0)
    models = {}
    for t in range(3):
        m = lr_model(["x", "y", "z"], rng.normal(size=3))
        m.to_json(tmp_path / f"{t}.json")
        models[t] = m
    imp = coefficient_trajectories(models)
    for t in range(3):
        back = TrainedModel.from_json(tmp_path / f"{t}.json")
        for c, w in zip(back.column_names, back.params["coef"]):
            assert imp.get(c, t) == abs(w)


def _cat_ds(values, times):
    n = len(values)
    return TemporalDataset([FeatureSpec("f", "categorical")], [f"e{i}" for i in range(n)], times,
                           [i % 2 for i in range(n)], {"f": values}, t_min=0)


def test_prevalence_introduced_level_and_constant():
    ds = _cat_ds(["x", "x", "x", "new", "x", "new"], [0, 0, 1, 1, 3, 3])
    pm = prevalence_trajectories(ds, ["f=new", "f=x"])
    assert list(pm.values[0][:2]) == [0.0, 0.5]
    assert np.isnan(pm.values[0][2])  # time 2 has no records
    ds2 = _cat_ds(["x"] * 4, [0, 1, 1, 2])
    assert list(prevalence_trajectories(ds2, ["f=x"]).values[0]) == [1.0, 1.0, 1.0]


def test_prevalence_rejects_non_dummy():
    ds = TemporalDataset([FeatureSpec("n", "numerical")], ["a", "b"], [0, 1], [0, 1],
                         {"n": [1.0, 2.0]})
    with pytest.raises(DomainError):
        prevalence_trajectories(ds, ["n"])


def test_prevalence_counting_oracle():
    rng = np.random.default_rng(4)
    n = 300
    times = rng.integers(0, 5, n)
    vals = [None if rng.random() < 0.2 else str(rng.choice(["p", "q", "r"])) for _ in range(n)]
    ds = _cat_ds(vals, times)
    cols = ["f=p", "f=q", "f=r", "f=<missing>", "f=<unseen>"]
    pm = prevalence_trajectories(ds, cols)
    for i, c in enumerate(cols):
        level = c.split("=")[1]
        for t in range(5):
            at = [v for v, tt in zip(vals, times) if tt == t]
            hits = sum(1 for v in at if (v is None if level == "<missing>" else v == level))
            assert pm.values[i, t] == hits / len(at)


def _score_oracle(imp, prev, k):
    top = max(max(row) for row in imp.values.tolist())
    scores = {}
    for f in imp.features:
        if f not in prev.features:
            continue
        i_max = max(imp.values[imp.features.index(f)])
        p_max = max(v for v in prev.values[prev.features.index(f)] if not np.isnan(v))
        scores[f] = (i_max / top if top > 0 else 0.0) * p_max
    return sorted(scores, key=lambda f: (-scores[f], f))[:k]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 8))
def test_top_features_match_oracle(seed, k):
    rng = np.random.default_rng(seed)
    feats = [f"c={i}" for i in range(7)]
    vals = np.round(rng.random((7, 4)), 1) * (rng.random((7, 1)) > 0.3)
    imp = ImportanceMatrix(feats, [0, 1, 2, 3], vals)
    pos = rng.integers(0, 11, (7, 4))
    prev = PrevalenceMatrix(feats, [0, 1, 2, 3], pos, np.full(4, 10))
    assert select_top_features(imp, prev, k) == _score_oracle(imp, prev, k)


def test_top_features_singleton_and_zero_importance():
    imp = ImportanceMatrix(["c=a"], [0], np.array([[0.3]]))
    prev = PrevalenceMatrix(["c=a"], [0], np.array([[2]]), np.array([4]))
    assert select_top_features(imp, prev, 5) == ["c=a"]
    imp2 = ImportanceMatrix(["c=a", "c=b"], [0], np.array([[0.0], [0.1]]))
    prev2 = PrevalenceMatrix(["c=a", "c=b"], [0], np.array([[4], [1]]), np.array([4]))
    assert select_top_features(imp2, prev2, 2) == ["c=b", "c=a"]


@pytest.fixture(scope="module")
def toy_run():
    ds = toy_dataset()
    cfg = ExperimentConfig([RegimeSpec("sliding_window", 2), RegimeSpec("all_period")],
                           [ModelSpec("LR", {"C": [1.0]})], seeds=(0, 1))
    return ds, run_experiment(cfg, ds)


def test_render_writes_all_panels(tmp_path, toy_run):
    ds, table = toy_run
    report = build_report(table, ds, k=2)
    paths = render_report(report, table, tmp_path)
    assert sorted(p.name for p in paths) == sorted(
        f"{p}.{ext}" for p in PANELS for ext in ("svg", "csv"))
    rows = read_panel_csv(tmp_path / "auroc_over_time.csv")
    series = {r["series"] for r in rows}
    assert series == {"deploy=0", "deploy=1", "deploy=2", "reference"}
    assert (tmp_path / "auroc_over_time.svg").read_text().lstrip().startswith("<?xml")


def test_render_csv_round_trip(tmp_path, toy_run):
    ds, table = toy_run
    report = build_report(table, ds, k=2)
    render_report(report, table, tmp_path)
    feats, times, mat = read_matrix(tmp_path / "importance.csv", "feature", "deploy_time", "importance")
    assert feats == report.importance.features and times == report.importance.times
    assert np.max(np.abs(mat - report.importance.values)) <= 1e-12
    feats, times, mat = read_matrix(tmp_path / "prevalence.csv", "feature", "time", "proportion")
    assert np.allclose(mat, report.prevalence.values, atol=1e-12, rtol=0, equal_nan=True)
    feats, times, mat = read_matrix(tmp_path / "missingness.csv", "feature", "time", "fraction")
    assert np.allclose(mat, report.missingness.fraction, atol=1e-12, rtol=0, equal_nan=True)
    drops = read_panel_csv(tmp_path / "max_drop.csv")
    for row, (d, v) in zip(drops, report.max_drop):
        assert int(row["deploy_time"]) == d and abs(float(row["drop"]) - v) <= 1e-12
    for f in report.selected_features:
        assert f in report.importance.features and f in report.prevalence.features


def test_render_is_deterministic(tmp_path, toy_run):
    ds, table = toy_run
    report = build_report(table, ds, k=2)
    render_report(report, table, tmp_path / "a")
    render_report(report, table, tmp_path / "b")
    for p in (tmp_path / "a").iterdir():
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()


def test_render_empty_table_leaves_nothing(tmp_path, toy_run):
    ds, table = toy_run
    report = build_report(table, ds, k=2)
    out = tmp_path / "out"
    with pytest.raises(RenderError):
        render_report(report, ResultTable([]), out)
    assert not out.exists()


def test_build_report_needs_lr_models(toy_run):
    ds, table = toy_run
    with pytest.raises(DomainError):
        build_report(table, ds, regime="all_historical")
