import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpc.errors import DimensionMismatch, InvalidConfig
from dpc.learners.boosting import (
    BoostedClassifier,
    BoostedRegressor,
    GbtParams,
    class_prior_scores,
    fit_boosted_classifier,
    fit_boosted_regressor,
    softmax,
)

STUMP = dict(learning_rate=0.1, max_depth=1, reg_lambda=0.0, min_child_weight=1.0)


def test_shrinkage_recursion():
    X = np.array([[0.0], [1.0]])
    y = np.array([0.0, 10.0])
    model = fit_boosted_regressor(X, y, GbtParams(n_estimators=10, **STUMP))
    for r, mse in enumerate(model.loss_trace):
        assert mse == pytest.approx(25 * 0.81**r, abs=1e-9)


def test_constant_targets_predict_mean():
    X = np.arange(8.0)[:, None]
    model = fit_boosted_regressor(X, np.full(8, 4.25), GbtParams(n_estimators=5))
    assert np.all(model.predict(X) == 4.25)
    assert all(t.n_leaves == 1 for t in model.trees)


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=30))
def test_zero_rounds_predict_mean(ys):
    y = np.array(ys)
    X = np.arange(len(y), dtype=float)[:, None]
    model = fit_boosted_regressor(X, y, GbtParams(n_estimators=0))
    assert np.allclose(model.predict(X), y.mean(), rtol=0, atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_regression_loss_never_increases(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 3))
    y = X[:, 0] ** 2 - X[:, 1] + rng.normal(scale=0.1, size=40)
    trace = fit_boosted_regressor(X, y, GbtParams(n_estimators=30, max_depth=3)).loss_trace
    assert np.all(np.diff(trace) <= 1e-9)


def test_single_class_saturates():
    X = np.arange(10.0)[:, None]
    model = fit_boosted_classifier(X, np.ones(10, dtype=int), GbtParams(n_estimators=100))
    assert np.all(model.predict_proba(X)[:, 1] >= 0.99)


def test_separable_three_class():
    x = np.linspace(0, 3, 31)[:-1]
    labels = np.where(x < 1, 0, np.where(x < 2, 1, 2))
    model = fit_boosted_classifier(x[:, None], labels, GbtParams(n_estimators=50, max_depth=2))
    assert np.array_equal(model.predict(x[:, None]), labels)


def test_zero_rounds_smoothed_frequencies():
    labels = np.array([0, 1, 1, 2, 2, 2])
    model = fit_boosted_classifier(np.zeros((6, 1)), labels, GbtParams(n_estimators=0))
    p = model.predict_proba(np.array([[5.0], [-3.0]]))
    expected = np.array([2, 3, 4]) / 9.0
    assert np.allclose(p, expected, atol=1e-15)


def test_prior_scores_weighted():
    labels = np.array([0, 2])
    s = class_prior_scores(labels, np.array([3.0, 1.0]))
    assert np.allclose(np.exp(s), [4 / 7, 1 / 7, 2 / 7])


def test_classifier_loss_never_increases(rng):
    X = rng.normal(size=(60, 2))
    labels = (X[:, 0] > 0).astype(int) + (X[:, 1] > 0.5).astype(int)
    trace = fit_boosted_classifier(X, labels, GbtParams(n_estimators=40, max_depth=3)).loss_trace
    assert np.all(np.diff(trace) <= 1e-9)


def test_softmax_stable():
    p = softmax(np.array([[1000.0, 0.0, -1000.0]]))
    assert np.isfinite(p).all() and p[0, 0] == pytest.approx(1.0)


def test_round_trips_bit_exact(rng):
    X = rng.normal(size=(50, 3))
    y = X @ [1.0, -2.0, 0.5]
    reg = fit_boosted_regressor(X, y, GbtParams(n_estimators=20, max_depth=3))
    clf = fit_boosted_classifier(X, np.digitize(y, [-1, 1]), GbtParams(n_estimators=10, max_depth=3))
    Z = rng.normal(size=(300, 3))
    assert np.array_equal(BoostedRegressor.from_dict(reg.to_dict()).predict(Z), reg.predict(Z))
    assert np.array_equal(BoostedClassifier.from_dict(clf.to_dict()).decision_function(Z), clf.decision_function(Z))


def test_prediction_replays_training(rng):
    X = rng.normal(size=(30, 2))
    y = np.sin(3 * X[:, 0])
    model = fit_boosted_regressor(X, y, GbtParams(n_estimators=25))
    assert model.loss_trace[-1] == float(np.mean((model.predict(X) - y) ** 2))


def test_errors():
    with pytest.raises(InvalidConfig):
        GbtParams(learning_rate=-1.0)
    with pytest.raises(InvalidConfig):
        fit_boosted_classifier(np.zeros((2, 1)), np.array([0, 3]))
    model = fit_boosted_regressor(np.zeros((2, 2)), np.zeros(2), GbtParams(n_estimators=1))
    with pytest.raises(DimensionMismatch):
        model.predict(np.zeros((1, 3)))
