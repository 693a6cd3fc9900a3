"""The three DPC backbone model types.

* direct regression: ``f(x) -> y`` trained on samples, compared pairwise;
* difference regression: ``f([x1 | x2]) -> y1 - y2`` trained on ordered pairs;
* direct classification: ``f([x1 | x2]) -> {0, 1, 2}`` trained on labelled pairs.

Any of them can sit on gradient-boosted trees or an MLP.  Direct regression
can also wrap a known ground-truth function (architecture ``"oracle"``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .core import Dataset, Threshold
from .errors import DimensionMismatch, EmptyDataset, InvalidConfig, UnknownProperty, WrongBackboneKind
from .learners.boosting import (
    BoostedClassifier,
    BoostedRegressor,
    GbtParams,
    fit_boosted_classifier,
    fit_boosted_regressor,
    softmax,
)
from .learners.mlp import CROSS_ENTROPY, MSE, MlpNetwork, MlpParams, mlp_train
from .learners.tree import BinnedMatrix
from .pairing import FIRST_HIGHER, SAME, SECOND_HIGHER, build_pair_dataset, label_pair, label_pairs, subsample_pairs
from .seeding import derive_seed
from .synthgen import GroundTruth

DIRECT_REGRESSION = "direct_regression"
DIFFERENCE_REGRESSION = "difference_regression"
DIRECT_CLASSIFICATION = "direct_classification"
KINDS = (DIRECT_REGRESSION, DIFFERENCE_REGRESSION, DIRECT_CLASSIFICATION)

GBT = "gbt"
MLP = "mlp"
ORACLE = "oracle"
ARCHITECTURES = (GBT, MLP, ORACLE)

MODEL_FORMAT_VERSION = 1

# class-score columns of the swapped pair: 1 <-> 2
_SWAP = [0, 2, 1]


@dataclass(frozen=True)
class OracleLearner:
    """Direct-regression learner that evaluates a known ground truth."""

    truth: GroundTruth
    property_name: str

    def predict(self, X) -> np.ndarray:
        return self.truth.evaluate(X, self.property_name)

    def to_dict(self) -> dict:
        return {"type": "oracle", "property": self.property_name, "ground_truth": self.truth.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "OracleLearner":
        return cls(GroundTruth.from_dict(d["ground_truth"]), d["property"])


def learner_from_dict(d: dict):
    kind = d["type"]
    if kind == "boosted_regressor":
        return BoostedRegressor.from_dict(d)
    if kind == "boosted_classifier":
        return BoostedClassifier.from_dict(d)
    if kind == "mlp":
        return MlpNetwork.from_dict(d)
    if kind == "oracle":
        return OracleLearner.from_dict(d)
    raise InvalidConfig(f"unknown learner type {kind!r}")


@dataclass(eq=False)
class DpcModel:
    kind: str
    architecture: str
    learner: object
    property_name: str
    threshold: Threshold
    n_features: int
    symmetrize: bool = False
    manifest: dict = field(default_factory=dict)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(f"model expects {self.n_features} features, got shape {X.shape}")
        return X

    def values(self, X) -> np.ndarray:
        """``f(x)`` per row; direct regression only."""
        if self.kind != DIRECT_REGRESSION:
            raise WrongBackboneKind(f"{self.kind} models compare pairs and cannot produce absolute values")
        return np.asarray(self.learner.predict(self._check(X)), dtype=float)

    def pair_outputs(self, X1, X2) -> np.ndarray:
        """Predicted difference (difference regression) or class probabilities /
        scores (direct classification) for rows ``[x1 | x2]``."""
        X1, X2 = self._check(X1), self._check(X2)
        if len(X1) != len(X2):
            raise DimensionMismatch("pair inputs must have equal row counts")
        if self.kind == DIFFERENCE_REGRESSION:
            fwd = self.learner.predict(np.hstack([X1, X2]))
            if self.symmetrize:
                rev = self.learner.predict(np.hstack([X2, X1]))
                return (fwd - rev) / 2.0
            return fwd
        if self.kind == DIRECT_CLASSIFICATION:
            fwd = _class_scores(self.learner, np.hstack([X1, X2]))
            if self.symmetrize:
                rev = _class_scores(self.learner, np.hstack([X2, X1]))
                return (softmax(fwd) + softmax(rev)[:, _SWAP]) / 2.0
            return fwd
        raise WrongBackboneKind(f"{self.kind} models have no pair-input learner")

    def predict_pairs(self, X1, X2) -> np.ndarray:
        """Labels for aligned rows of ``X1`` and ``X2``."""
        t = self.threshold.value
        if self.kind == DIRECT_REGRESSION:
            return label_pairs(self.values(X1), self.values(X2), t)
        out = self.pair_outputs(X1, X2)
        if self.kind == DIFFERENCE_REGRESSION:
            return _difference_labels(out, t)
        labels = np.argmax(out, axis=1)
        if self.symmetrize:
            # an exact 1-vs-2 tie would otherwise pick 1 in both orders
            labels[(labels == FIRST_HIGHER) & (out[:, 1] == out[:, 2])] = SAME
        return labels

    def predict_indexed(self, X, first, second) -> np.ndarray:
        """Labels for pairs given as indices into the rows of ``X``.

        Direct regression evaluates ``f`` once per row, so the result is
        exactly antisymmetric under swapping ``first`` and ``second``.
        """
        X = self._check(X)
        first = np.asarray(first, dtype=np.int64)
        second = np.asarray(second, dtype=np.int64)
        if self.kind == DIRECT_REGRESSION:
            f = self.values(X)
            return label_pairs(f[first], f[second], self.threshold.value)
        return self.predict_pairs(X[first], X[second])

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "tool_version": __version__,
            "kind": self.kind,
            "architecture": self.architecture,
            "property": self.property_name,
            "threshold": self.threshold.to_dict(),
            "n_features": self.n_features,
            "symmetrize": self.symmetrize,
            "manifest": self.manifest,
            "learner": self.learner.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DpcModel":
        if d.get("format_version") != MODEL_FORMAT_VERSION:
            raise InvalidConfig(f"unsupported model format version {d.get('format_version')!r}")
        return cls(
            d["kind"],
            d["architecture"],
            learner_from_dict(d["learner"]),
            d["property"],
            Threshold.from_dict(d["threshold"]),
            int(d["n_features"]),
            bool(d["symmetrize"]),
            d["manifest"],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, allow_nan=False)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "DpcModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _class_scores(learner, X) -> np.ndarray:
    if isinstance(learner, BoostedClassifier):
        return learner.decision_function(X)
    return learner.predict(X)


def _difference_labels(diff: np.ndarray, t: float) -> np.ndarray:
    out = np.zeros(len(diff), dtype=np.int64)
    out[diff < -t] = SECOND_HIGHER
    out[diff > t] = FIRST_HIGHER
    return out


def class_weights(labels: np.ndarray) -> np.ndarray:
    """Inverse-frequency weights ``n / (3 * count[label])`` per row."""
    counts = np.bincount(labels, minlength=3).astype(float)
    present = counts > 0
    per_class = np.zeros(3)
    per_class[present] = len(labels) / (present.sum() * counts[present])
    return per_class[labels]


def train_backbone(
    kind: str,
    architecture: str,
    train: Dataset,
    property_name: str,
    threshold: Threshold,
    params: GbtParams | MlpParams | None = None,
    seed: int = 0,
    *,
    max_pairs: int | None = None,
    class_weight: str | None = None,
    symmetrize: bool = False,
    truth: GroundTruth | None = None,
) -> DpcModel:
    """Train one backbone on the training experiments.

    Pair-input kinds train on all ordered training pairs (self-pairs
    included) unless ``max_pairs`` caps them.  Classification labels use the
    same ``threshold`` that prediction uses.
    """
    if kind not in KINDS:
        raise InvalidConfig(f"unknown backbone kind {kind!r}; choose from {KINDS}")
    if architecture not in ARCHITECTURES:
        raise InvalidConfig(f"unknown architecture {architecture!r}; choose from {ARCHITECTURES}")
    if len(train) == 0:
        raise EmptyDataset("training set is empty")
    if property_name not in train.property_names:
        raise UnknownProperty(f"unknown property {property_name!r}; dataset has {list(train.property_names)}")
    if class_weight not in (None, "balanced"):
        raise InvalidConfig(f"class_weight must be None or 'balanced', got {class_weight!r}")
    if architecture == GBT:
        params = params or GbtParams()
        if not isinstance(params, GbtParams):
            raise InvalidConfig("gbt architecture needs GbtParams")
    elif architecture == MLP:
        params = params or MlpParams()
        if not isinstance(params, MlpParams):
            raise InvalidConfig("mlp architecture needs MlpParams")
    else:
        if kind != DIRECT_REGRESSION or truth is None:
            raise InvalidConfig("the oracle architecture needs a ground truth and the direct_regression kind")
        params = None

    X = train.features()
    y = train.values(property_name)
    n_rows = len(X)
    if kind == DIRECT_REGRESSION:
        if architecture == GBT:
            learner = fit_boosted_regressor(X, y, params)
        elif architecture == MLP:
            learner = mlp_train(X, y, MSE, params, seed=seed)
        else:
            learner = OracleLearner(truth, property_name)
    else:
        pairs = build_pair_dataset(train.samples(), property_name, threshold)
        if max_pairs is not None:
            pairs = subsample_pairs(pairs, max_pairs, derive_seed(seed, "train-pairs"))
        first, second = np.asarray(pairs.first), np.asarray(pairs.second)
        n_rows = len(pairs)
        if kind == DIFFERENCE_REGRESSION:
            target = y[first] - y[second]
            if architecture == GBT:
                learner = fit_boosted_regressor(BinnedMatrix.from_pairs(X, first, second), target, params)
            else:
                learner = mlp_train(np.hstack([X[first], X[second]]), target, MSE, params, seed=seed)
        else:
            labels = np.asarray(pairs.labels)
            w = class_weights(labels) if class_weight == "balanced" else None
            if architecture == GBT:
                learner = fit_boosted_classifier(BinnedMatrix.from_pairs(X, first, second), labels, params,
                                                 sample_weight=w)
            else:
                learner = mlp_train(np.hstack([X[first], X[second]]), labels, CROSS_ENTROPY, params,
                                    seed=seed, sample_weight=w)

    manifest = {
        "kind": kind,
        "architecture": architecture,
        "property": property_name,
        "seed": int(seed),
        "params": None if params is None else params.to_dict(),
        "threshold": threshold.to_dict(),
        "train_experiments": train.experiment_ids,
        "n_train_samples": len(train),
        "n_training_rows": int(n_rows),
        "max_pairs": max_pairs,
        "class_weight": class_weight,
        "symmetrize": symmetrize,
        "dataset_fingerprint": train.fingerprint(),
        "feature_names": list(train.feature_names),
    }
    return DpcModel(kind, architecture, learner, property_name, threshold, train.n_features, symmetrize, manifest)


def predict_pair(model: DpcModel, x1: Sequence[float], x2: Sequence[float]) -> int:
    if model.kind == DIRECT_REGRESSION:
        return label_pair(predict_value(model, x1), predict_value(model, x2), model.threshold.value)
    return int(model.predict_pairs(np.asarray(x1, dtype=float)[None, :], np.asarray(x2, dtype=float)[None, :])[0])


def predict_value(model: DpcModel, x: Sequence[float]) -> float:
    """Predicted property value for one parameter vector (direct regression only)."""
    return float(model.values(np.asarray(x, dtype=float)[None, :])[0])


@dataclass(frozen=True)
class RankedCandidate:
    index: int
    wins: int
    same: int
    losses: int


def rank_candidates(model: DpcModel, candidates) -> list[RankedCandidate]:
    """Order candidates by how many others each is predicted to beat.

    For candidate i every ordered pair (i, j), j != i, counts as a win
    (label 1), a loss (label 2) or a tie (label 0).  Sorted by descending
    wins; equal wins keep input order.
    """
    C = np.asarray(candidates, dtype=float)
    if C.ndim != 2 or len(C) == 0:
        raise InvalidConfig("need at least one candidate as an n x d array")
    if C.shape[1] != model.n_features:
        raise DimensionMismatch(f"model expects {model.n_features} features, candidates have {C.shape[1]}")
    n = len(C)
    first = np.repeat(np.arange(n), n)
    second = np.tile(np.arange(n), n)
    off = first != second
    first, second = first[off], second[off]
    labels = model.predict_indexed(C, first, second) if n > 1 else np.zeros(0, dtype=np.int64)
    wins = np.bincount(first[labels == FIRST_HIGHER], minlength=n)
    losses = np.bincount(first[labels == SECOND_HIGHER], minlength=n)
    same = np.bincount(first[labels == SAME], minlength=n)
    ranked = [RankedCandidate(i, int(wins[i]), int(same[i]), int(losses[i])) for i in range(n)]
    return sorted(ranked, key=lambda r: (-r.wins, r.index))
