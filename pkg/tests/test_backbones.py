import numpy as np
import pytest

from dpc.backbones import (
    DIFFERENCE_REGRESSION,
    DIRECT_CLASSIFICATION,
    DIRECT_REGRESSION,
    KINDS,
    DpcModel,
    OracleLearner,
    class_weights,
    predict_pair,
    predict_value,
    rank_candidates,
    train_backbone,
)
from dpc.core import Threshold
from dpc.errors import DimensionMismatch, InvalidConfig, UnknownProperty, WrongBackboneKind
from dpc.learners.boosting import GbtParams
from dpc.learners.mlp import MlpParams
from dpc.pairing import build_pair_dataset, swap_label
from dpc.synthgen import SynthConfig, generate

from conftest import make_dataset

FAST = {"gbt": GbtParams(n_estimators=15, max_depth=3), "mlp": MlpParams(epochs=25, hidden=(8, 8))}


class ConstantLearner:
    def __init__(self, value):
        self.value = value

    def predict(self, X):
        return np.full(len(X), self.value)


@pytest.fixture(scope="module")
def small():
    ds, truth = generate(SynthConfig(n_experiments=4, samples_per_experiment=3, seed=5))
    return ds, truth


def test_manifest_records_default_hyperparameters(small):
    ds, _ = small
    model = train_backbone(DIRECT_REGRESSION, "gbt", ds, "uts", Threshold.absolute(1.0),
                           params=GbtParams(n_estimators=3))
    m = model.manifest
    assert m["kind"] == DIRECT_REGRESSION
    assert m["params"]["max_depth"] == 6 and m["params"]["learning_rate"] == 0.1
    assert GbtParams().n_estimators == 1000
    assert m["n_training_rows"] == 12
    assert m["train_experiments"] == ds.experiment_ids


def test_difference_on_single_sample():
    ds = make_dataset([4.0])
    model = train_backbone(DIFFERENCE_REGRESSION, "gbt", ds, "y", Threshold.absolute(0.0),
                           params=GbtParams(n_estimators=2))
    assert model.manifest["n_training_rows"] == 1
    assert model.learner.base_score == 0.0


def test_classifier_learns_three_point_matrix(three_points, unit_threshold):
    model = train_backbone(DIRECT_CLASSIFICATION, "gbt", three_points, "y", unit_threshold,
                           params=GbtParams(n_estimators=50, max_depth=2, min_child_weight=0.0))
    assert model.manifest["n_training_rows"] == 9
    X = three_points.features()
    pd = build_pair_dataset(three_points.samples(), "y", unit_threshold)
    assert np.array_equal(model.predict_indexed(X, pd.first, pd.second), pd.labels)


def test_oracle_matches_true_labels(small):
    ds, truth = small
    t = Threshold.absolute(2.0)
    model = train_backbone(DIRECT_REGRESSION, "oracle", ds, "uts", t, truth=truth)
    X = ds.features()
    g = truth.evaluate(X, "uts")
    pd = build_pair_dataset(ds.samples(), "uts", t)
    from dpc.pairing import label_pairs
    assert np.array_equal(model.predict_indexed(X, pd.first, pd.second), label_pairs(g[pd.first], g[pd.second], 2.0))
    assert predict_value(model, X[0]) == g[0]


def test_identity_and_constant_models(small):
    ds, _ = small
    t = Threshold.absolute(0.5)
    model = train_backbone(DIRECT_REGRESSION, "gbt", ds, "uts", t, params=FAST["gbt"])
    for x in ds.features():
        assert predict_pair(model, x, x) == 0
    zero = DpcModel(DIFFERENCE_REGRESSION, "gbt", ConstantLearner(0.0), "uts", t, ds.n_features)
    X = ds.features()
    assert np.all(zero.predict_pairs(X, X[::-1]) == 0)
    const = DpcModel(DIRECT_REGRESSION, "gbt", ConstantLearner(3.0), "uts", t, ds.n_features)
    assert {predict_value(const, x) for x in X} == {3.0}


def test_wrong_kind_and_dimensions(small):
    ds, _ = small
    model = train_backbone(DIRECT_CLASSIFICATION, "gbt", ds, "uts", Threshold.absolute(1.0), params=FAST["gbt"])
    with pytest.raises(WrongBackboneKind):
        predict_value(model, ds.features()[0])
    with pytest.raises(DimensionMismatch):
        predict_pair(model, [1.0], [2.0])
    with pytest.raises(UnknownProperty):
        train_backbone(DIRECT_REGRESSION, "gbt", ds, "nope", Threshold.absolute(1.0))
    with pytest.raises(InvalidConfig):
        train_backbone(DIFFERENCE_REGRESSION, "oracle", ds, "uts", Threshold.absolute(1.0))
    with pytest.raises(InvalidConfig):
        train_backbone(DIRECT_REGRESSION, "mlp", ds, "uts", Threshold.absolute(1.0), params=GbtParams())


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("arch", ["gbt", "mlp"])
def test_save_load_bit_exact(kind, arch, small, tmp_path, rng):
    ds, _ = small
    model = train_backbone(kind, arch, ds, "uts", Threshold.absolute(1.0), params=FAST[arch], seed=3)
    path = tmp_path / "m.json"
    model.save(path)
    again = DpcModel.load(path)
    assert again.dumps() == model.dumps()
    A = rng.uniform(0, 500, size=(50, ds.n_features))
    B = rng.uniform(0, 500, size=(50, ds.n_features))
    assert np.array_equal(again.predict_pairs(A, B), model.predict_pairs(A, B))
    if kind != DIRECT_REGRESSION:
        assert np.array_equal(again.pair_outputs(A, B), model.pair_outputs(A, B))


@pytest.mark.parametrize("kind", [DIFFERENCE_REGRESSION, DIRECT_CLASSIFICATION])
def test_symmetrized_pairs_are_antisymmetric(kind, small, rng):
    ds, _ = small
    model = train_backbone(kind, "gbt", ds, "uts", Threshold.absolute(1.0), params=FAST["gbt"], symmetrize=True)
    A = rng.uniform(0, 500, size=(40, ds.n_features))
    B = rng.uniform(0, 500, size=(40, ds.n_features))
    assert np.array_equal(model.predict_pairs(B, A), swap_label(model.predict_pairs(A, B)))


def test_max_pairs_caps_training_rows(small):
    ds, _ = small
    model = train_backbone(DIRECT_CLASSIFICATION, "gbt", ds, "uts", Threshold.absolute(1.0),
                           params=FAST["gbt"], max_pairs=50, class_weight="balanced")
    assert model.manifest["n_training_rows"] == 50


def test_class_weights_balance():
    labels = np.array([0, 1, 1, 1, 2, 2])
    w = class_weights(labels)
    assert [w[labels == z].sum() for z in range(3)] == pytest.approx([2.0, 2.0, 2.0])


def _oracle_model(values):
    from dpc.synthgen import GroundTruth
    truth = GroundTruth("linear", {"uts": (0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)})
    ds = make_dataset([0.0], features=[[0.0] * 6], prop="uts")
    return train_backbone(DIRECT_REGRESSION, "oracle", ds, "uts", Threshold.absolute(1.0), truth=truth)


def test_rank_examples():
    model = _oracle_model(None)
    # heat_treat_time (column 3) is the only active term: g = x3
    C = np.zeros((4, 6))
    C[:, 3] = [5.0, 20.0, 10.0, 15.0]
    ranked = rank_candidates(model, C)
    assert [r.index for r in ranked] == [1, 3, 2, 0]
    assert [r.wins for r in ranked] == [3, 2, 1, 0]
    single = rank_candidates(model, C[:1])
    assert (single[0].index, single[0].wins) == (0, 0)
    same = rank_candidates(model, np.ones((3, 6)))
    assert [r.index for r in same] == [0, 1, 2]
    assert all(r.same == 2 for r in same)
