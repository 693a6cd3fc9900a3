"""Gradient-boosted tree ensembles with second-order (Newton) leaf weights."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import DimensionMismatch, InvalidConfig
from .tree import BinnedMatrix, RegressionTree, grow_tree

N_CLASSES = 3


@dataclass(frozen=True)
class GbtParams:
    n_estimators: int = 1000
    learning_rate: float = 0.1
    max_depth: int = 6
    reg_lambda: float = 1.0
    min_child_weight: float = 1.0

    def __post_init__(self):
        if self.n_estimators < 0 or self.max_depth < 0:
            raise InvalidConfig("n_estimators and max_depth must be >= 0")
        if self.learning_rate < 0 or self.reg_lambda < 0 or self.min_child_weight < 0:
            raise InvalidConfig("learning_rate, reg_lambda and min_child_weight must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


def softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def _check_xy(X, y):
    """Bin ``X`` (unless already binned) and validate it against ``y``."""
    y = np.asarray(y)
    if isinstance(X, BinnedMatrix):
        binned = X
    else:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D feature array, got shape {X.shape}")
        if len(X) == 0:
            raise InvalidConfig("cannot fit to zero rows")
        binned = BinnedMatrix(X)
    if y.ndim != 1 or binned.n != len(y):
        raise DimensionMismatch(f"{binned.n} feature rows and targets of shape {y.shape} do not line up")
    if len(y) == 0:
        raise InvalidConfig("cannot fit to zero rows")
    return binned, y


@dataclass(eq=False)
class BoostedRegressor:
    base_score: float
    trees: list[RegressionTree]
    params: GbtParams
    n_features: int
    loss_trace: list[float] = field(default_factory=list)

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got shape {X.shape}")
        out = np.full(len(X), self.base_score)
        lr = self.params.learning_rate
        for tree in self.trees:
            out = out + lr * tree.predict(X)
        return out

    def to_dict(self) -> dict:
        return {
            "type": "boosted_regressor",
            "base_score": self.base_score,
            "n_features": self.n_features,
            "params": self.params.to_dict(),
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoostedRegressor":
        return cls(
            float(d["base_score"]),
            [RegressionTree.from_dict(t) for t in d["trees"]],
            GbtParams(**d["params"]),
            int(d["n_features"]),
        )


@dataclass(eq=False)
class BoostedClassifier:
    """Three-class multinomial-deviance ensemble; ``trees[r][c]`` is round r, class c."""

    base_scores: np.ndarray
    trees: list[list[RegressionTree]]
    params: GbtParams
    n_features: int
    loss_trace: list[float] = field(default_factory=list)

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got shape {X.shape}")
        out = np.tile(self.base_scores, (len(X), 1))
        lr = self.params.learning_rate
        for group in self.trees:
            for c, tree in enumerate(group):
                out[:, c] = out[:, c] + lr * tree.predict(X)
        return out

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        # argmax returns the lowest index on ties
        return np.argmax(self.decision_function(X), axis=1)

    def to_dict(self) -> dict:
        return {
            "type": "boosted_classifier",
            "base_scores": [float(v) for v in self.base_scores],
            "n_features": self.n_features,
            "params": self.params.to_dict(),
            "trees": [[t.to_dict() for t in group] for group in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoostedClassifier":
        return cls(
            np.array(d["base_scores"], dtype=float),
            [[RegressionTree.from_dict(t) for t in group] for group in d["trees"]],
            GbtParams(**d["params"]),
            int(d["n_features"]),
        )


def fit_boosted_regressor(X, y, params: GbtParams | None = None) -> BoostedRegressor:
    """Squared-error boosting from ``base_score = mean(y)``.

    ``X`` is an n x d array or a prebuilt :class:`BinnedMatrix`.

    ``loss_trace[r]`` is the training MSE after r rounds (entry 0 is the
    base score alone).
    """
    params = params or GbtParams()
    binned, y = _check_xy(X, y)
    y = y.astype(float)
    base = math.fsum(y) / len(y)
    pred = np.full(len(y), base)
    h = np.ones(len(y))
    trees = []
    trace = [float(np.mean((pred - y) ** 2))]
    for _ in range(params.n_estimators):
        g = pred - y
        tree, leaf = grow_tree(binned, g, h, params.max_depth, params.reg_lambda, params.min_child_weight)
        pred = pred + params.learning_rate * tree.value[leaf]
        trees.append(tree)
        trace.append(float(np.mean((pred - y) ** 2)))
    return BoostedRegressor(base, trees, params, binned.d, trace)


def class_prior_scores(labels: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Per-class starting scores ``log((count_c + 1) / (n + 3))``."""
    if weights is None:
        counts = np.bincount(labels, minlength=N_CLASSES).astype(float)
        n = float(len(labels))
    else:
        counts = np.bincount(labels, weights=weights, minlength=N_CLASSES)
        n = float(weights.sum())
    return np.log((counts + 1.0) / (n + N_CLASSES))


def cross_entropy(scores: np.ndarray, labels: np.ndarray, weights: np.ndarray | None = None) -> float:
    nll = -log_softmax(scores)[np.arange(len(labels)), labels]
    if weights is None:
        return float(np.mean(nll))
    return float(np.sum(weights * nll) / np.sum(weights))


def fit_boosted_classifier(X, labels, params: GbtParams | None = None,
                           sample_weight=None) -> BoostedClassifier:
    """Softmax boosting: each round fits one tree per class to
    ``g = p_c - 1[label == c]``, ``h = p_c (1 - p_c)``.

    ``loss_trace[r]`` is the training cross-entropy after r rounds.
    """
    params = params or GbtParams()
    binned, labels = _check_xy(X, labels)
    labels = labels.astype(np.int64)
    if labels.min() < 0 or labels.max() >= N_CLASSES:
        raise InvalidConfig("labels must be in {0, 1, 2}")
    w = None if sample_weight is None else np.asarray(sample_weight, dtype=float)
    base = class_prior_scores(labels, w)
    n = len(labels)
    onehot = np.zeros((n, N_CLASSES))
    onehot[np.arange(n), labels] = 1.0
    scores = np.tile(base, (n, 1))
    trees = []
    trace = [cross_entropy(scores, labels, w)]
    for _ in range(params.n_estimators):
        p = softmax(scores)
        group = []
        update = np.empty_like(scores)
        for c in range(N_CLASSES):
            g = p[:, c] - onehot[:, c]
            h = p[:, c] * (1.0 - p[:, c])
            if w is not None:
                g, h = g * w, h * w
            tree, leaf = grow_tree(binned, g, h, params.max_depth, params.reg_lambda, params.min_child_weight)
            update[:, c] = tree.value[leaf]
            group.append(tree)
        for c in range(N_CLASSES):
            scores[:, c] = scores[:, c] + params.learning_rate * update[:, c]
        trees.append(group)
        trace.append(cross_entropy(scores, labels, w))
    return BoostedClassifier(base, trees, params, binned.d, trace)
