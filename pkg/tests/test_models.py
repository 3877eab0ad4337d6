import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import expit

from drifteval.data import EncodedMatrix
from drifteval.errors import DomainError, TrainingError, UndefinedMetricError
from drifteval.models import (ModelSpec, TrainedModel, feature_importance, grid_search,
                              predict_proba)
from drifteval.models.gbdt import tree_depth, train_gbdt
from drifteval.models.grid import DEFAULT_GRIDS
from drifteval.models.lr import lr_objective, train_lr
from drifteval.models.mlp import mlp_loss_and_grad, train_mlp

from oracles import central_diff, rel_err


def logistic_problem(n=120, d=4, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    w = rng.normal(size=d)
    y = (rng.random(n) < expit(X @ w)).astype(int)
    return X, y


# ---------------------------------------------------------------- logistic regression

def test_lr_separable_pair():
    m = train_lr(np.array([[-1.0], [1.0]]), np.array([0, 1]), C=1e5)
    assert predict_proba(m, np.array([[1.0]]))[0] > 0.99


@pytest.mark.parametrize("y", [[1, 1, 1], [0, 0, 0]])
def test_single_class_rejected(y):
    X = np.arange(3.0)[:, None]
    for train in (lambda: train_lr(X, y, 1.0), lambda: train_gbdt(X, y, 5, 2, 0.1),
                  lambda: train_mlp(X, y, (3,), 0.01, epochs=2)):
        with pytest.raises(TrainingError):
            train()


def test_non_finite_rejected():
    X = np.array([[0.0], [np.nan], [1.0]])
    with pytest.raises(TrainingError):
        train_lr(X, [0, 1, 1], 1.0)


def test_lr_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 5))
    y = rng.integers(0, 2, 30)
    for _ in range(20):
        p = rng.normal(size=6)
        _, g = lr_objective(p, X, y, 0.7)
        fd = central_diff(lambda q: lr_objective(q, X, y, 0.7)[0], p, 1e-5)
        assert rel_err(g, fd) < 1e-5


def test_lr_converges_to_stationary_point():
    X, y = logistic_problem()
    m = train_lr(X, y, C=1.0)
    assert m.meta["converged"]
    params = np.append(m.params["coef"], m.params["intercept"])
    _, g = lr_objective(params, X, y, 1.0)
    assert np.max(np.abs(g)) <= 1e-6


def test_lr_probability_matches_sigmoid():
    X, y = logistic_problem()
    m = train_lr(X, y, C=10.0)
    w, b = m.params["coef"], float(m.params["intercept"])
    manual = 1 / (1 + np.exp(-(X @ w + b)))
    assert np.max(np.abs(predict_proba(m, X) - manual)) < 1e-12


def test_zero_lr_predicts_half():
    m = TrainedModel("LR", {"C": 1.0}, {"coef": np.zeros(3), "intercept": np.array(0.0)},
                     ["a", "b", "c"])
    assert np.all(predict_proba(m, np.random.default_rng(0).normal(size=(5, 3))) == 0.5)


def test_lr_monotone_in_positive_weight():
    X, y = logistic_problem()
    m = train_lr(X, y, C=1.0)
    j = int(np.argmax(m.params["coef"]))
    grid = np.tile(X[0], (20, 1))
    grid[:, j] = np.linspace(-3, 3, 20)
    assert np.all(np.diff(predict_proba(m, grid)) >= 0)


def test_lr_importance_definition():
    m = TrainedModel("LR", {"C": 1.0}, {"coef": np.array([-2.0, 0.5]), "intercept": np.array(3.0)},
                     ["a", "b"])
    assert list(feature_importance(m)) == [("a", 2.0), ("b", 0.5)]


def test_lr_flipped_labels_keep_ranking():
    X, y = logistic_problem(d=5, seed=3)
    a = train_lr(X, y, 1.0)
    b = train_lr(X, 1 - y, 1.0)
    assert np.allclose(a.params["coef"], -b.params["coef"], atol=1e-8)
    assert [c for c, _ in feature_importance(a)] == [c for c, _ in feature_importance(b)]


# ---------------------------------------------------------------- gradient boosting

def test_gbdt_threshold_concept():
    x = np.linspace(-1, 1, 100)[:, None]
    y = (x[:, 0] > 0.13).astype(int)
    m = train_gbdt(x, y, 50, 3, 0.1)
    assert np.mean((predict_proba(m, x) >= 0.5) == y) == 1.0


def test_gbdt_structure_and_loss():
    X, y = logistic_problem(n=200)
    m = train_gbdt(X, y, 20, 3, 0.1)
    assert len(m.params["trees"]) == 20
    assert all(tree_depth(t) <= 3 for t in m.params["trees"])
    losses = np.array(m.meta["train_loss"])
    assert np.all(np.diff(losses) <= 1e-12)


def test_gbdt_pure_node_not_split():
    # one region is pure after the first split; its gradient is constant there so no further cut
    x = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([0, 0, 1, 1])
    m = train_gbdt(x, y, 3, 5, 0.1)
    for t in m.params["trees"]:
        assert np.sum(t["feature"] >= 0) == 1


def test_gbdt_zero_trees_is_prior():
    X, y = logistic_problem()
    m = train_gbdt(X, y, 0, 3, 0.1)
    assert np.allclose(predict_proba(m, X), y.mean(), atol=1e-12)
    assert all(v == 0.0 for _, v in feature_importance(m))


def test_gbdt_importance_prefers_informative_column():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 3))
    y = (X[:, 1] > 0).astype(int)
    imp = feature_importance(train_gbdt(X, y, 10, 2, 0.1, column_names=["a", "b", "c"]))
    assert imp[0][0] == "b"
    assert all(v >= 0 for _, v in imp)


# ---------------------------------------------------------------- neural network

def test_mlp_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(10, 3))
    y = rng.integers(0, 2, 10).astype(float)
    h = 4
    for _ in range(5):
        theta = rng.normal(size=3 * h + h + h + 1)
        _, g = mlp_loss_and_grad(theta, X, y, h)
        fd = central_diff(lambda t: mlp_loss_and_grad(t, X, y, h)[0], theta, 1e-5)
        assert rel_err(g, fd) < 1e-4


def test_mlp_solves_xor():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0])
    m = train_mlp(X, y, (5,), 0.05, seed=0, epochs=3000)
    assert np.mean((predict_proba(m, X) >= 0.5) == y) == 1.0


def test_mlp_deterministic_and_unsupported_importance():
    X, y = logistic_problem(n=60)
    a = train_mlp(X, y, (3,), 0.01, seed=4, epochs=50)
    b = train_mlp(X, y, (3,), 0.01, seed=4, epochs=50)
    for k in a.params:
        assert np.array_equal(a.params[k], b.params[k])
    imp = feature_importance(a)
    assert list(imp) == [] and not imp.supported


def test_mlp_divergence_names_learning_rate(monkeypatch):
    import drifteval.models.mlp as mlp_mod

    def blown_up(theta, X, y, hidden):
        return float("nan"), np.full_like(theta, np.nan)

    monkeypatch.setattr(mlp_mod, "mlp_loss_and_grad", blown_up)
    with pytest.raises(TrainingError, match="learning_rate_init=10"):
        train_mlp(np.eye(3), [0, 1, 1], (3,), 10.0, epochs=5)


# ---------------------------------------------------------------- shared behaviour

@settings(max_examples=25, deadline=None)
@given(st.integers(0, 1000))
def test_probabilities_strictly_inside_unit_interval(seed):
    X, y = logistic_problem(n=40, d=2, seed=seed)
    if y.min() == y.max():
        return
    Xt = np.random.default_rng(seed).normal(scale=50, size=(30, 2))
    for m in (train_lr(X, y, 1e5), train_gbdt(X, y, 5, 2, 0.1), train_mlp(X, y, (3,), 0.01, epochs=20)):
        p = predict_proba(m, Xt)
        assert np.all((p > 0) & (p < 1))
        assert np.array_equal(p, predict_proba(m, Xt))


def test_dimension_mismatch():
    X, y = logistic_problem(d=3)
    m = train_lr(X, y, 1.0)
    with pytest.raises(DomainError):
        predict_proba(m, X[:, :2])


@pytest.mark.parametrize("kind,n", [("LR", 8), ("GBDT", 8), ("MLP", 6)])
def test_default_grid_sizes(kind, n):
    assert len(ModelSpec(kind).cells()) == n


def test_default_grid_values():
    assert DEFAULT_GRIDS["LR"]["C"] == [0.01, 0.1, 1, 10, 1e2, 1e3, 1e4, 1e5]
    assert ModelSpec("GBDT").cells()[0] == {"n_estimators": 50, "max_depth": 3, "learning_rate": 0.01}
    assert ModelSpec("MLP").cells()[0] == {"hidden_layer_sizes": (3,), "learning_rate_init": 1e-4}


def _matrices(seed=0):
    X, y = logistic_problem(n=160, seed=seed)
    names = [f"c{j}" for j in range(X.shape[1])]
    return EncodedMatrix(names, X[:120], y[:120]), EncodedMatrix(names, X[120:], y[120:])


def test_grid_tie_goes_to_earliest_cell():
    train, val = _matrices()
    m = grid_search(ModelSpec("LR", {"C": [1.0, 1.0, 1.0]}), train, val)
    assert m.meta["cell_index"] == 0
    assert len(set(m.meta["cell_scores"])) == 1


def test_grid_winner_dominates_cells():
    train, val = _matrices(1)
    m = grid_search(ModelSpec("LR"), train, val)
    assert len(m.meta["cell_scores"]) == 8
    assert all(m.meta["val_auroc"] >= s for s in m.meta["cell_scores"])
    assert m.hyperparams["C"] == DEFAULT_GRIDS["LR"]["C"][m.meta["cell_index"]]


def test_grid_single_class_validation():
    train, val = _matrices()
    val = EncodedMatrix(val.column_names, val.rows, np.zeros_like(val.labels))
    with pytest.raises(UndefinedMetricError):
        grid_search(ModelSpec("LR"), train, val)


def test_model_spec_rejects_bad_grid():
    with pytest.raises(DomainError):
        ModelSpec("LR", {"alpha": [1]})
    with pytest.raises(DomainError):
        ModelSpec("SVM")
    with pytest.raises(DomainError):
        ModelSpec("LR", {"C": []})


@pytest.mark.parametrize("make", [
    lambda X, y: train_lr(X, y, 1.0),
    lambda X, y: train_gbdt(X, y, 4, 3, 0.1),
    lambda X, y: train_mlp(X, y, (5,), 0.01, seed=2, epochs=30),
])
def test_json_round_trip(tmp_path, make):
    X, y = logistic_problem()
    m = make(X, y)
    path = tmp_path / "m.json"
    m.to_json(path)
    back = TrainedModel.from_json(path)
    assert back.kind == m.kind and back.hyperparams == m.hyperparams
    assert np.array_equal(predict_proba(back, X), predict_proba(m, X))
