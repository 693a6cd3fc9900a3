"""Pairwise accuracy, confusion matrices, repeat-seed intervals and learning curves."""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .backbones import DpcModel, train_backbone
from .core import Dataset
from .errors import DimensionMismatch, InvalidConfig, KTooLarge, TooFewValues
from .pairing import PairDataset
from .seeding import derive_seed

CI_METHOD = "normal approximation, mean +/- z * s / sqrt(n), s with n-1 denominator"


@dataclass
class EvalReport:
    accuracy: float
    confusion: list[list[int]]  # rows = true label, columns = predicted
    n_pairs: int
    precision: list[float | None]
    recall: list[float | None]
    manifest: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "confusion": self.confusion,
            "n_pairs": self.n_pairs,
            "precision": self.precision,
            "recall": self.recall,
            "manifest": self.manifest,
        }

    def to_text(self) -> str:
        lines = [f"pairs     {self.n_pairs}", f"accuracy  {100 * self.accuracy:.2f}%", "",
                 "confusion (rows true, cols predicted)",
                 f"{'':>8}{'pred 0':>10}{'pred 1':>10}{'pred 2':>10}"]
        for z, row in enumerate(self.confusion):
            lines.append(f"{'true ' + str(z):>8}" + "".join(f"{c:>10d}" for c in row))
        lines.append("")
        lines.append(f"{'class':>8}{'precision':>12}{'recall':>10}")
        for z in range(3):
            p, r = self.precision[z], self.recall[z]
            ps = "-" if p is None else f"{100 * p:.2f}%"
            rs = "-" if r is None else f"{100 * r:.2f}%"
            lines.append(f"{z:>8}{ps:>12}{rs:>10}")
        return "\n".join(lines) + "\n"


def confusion_report(true: np.ndarray, pred: np.ndarray, manifest: dict | None = None) -> EvalReport:
    true = np.asarray(true, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    cm = np.bincount(3 * true + pred, minlength=9).reshape(3, 3)
    n = int(cm.sum())
    col, row = cm.sum(axis=0), cm.sum(axis=1)
    precision = [float(cm[z, z] / col[z]) if col[z] else None for z in range(3)]
    recall = [float(cm[z, z] / row[z]) if row[z] else None for z in range(3)]
    acc = float(np.trace(cm) / n) if n else 0.0
    return EvalReport(acc, cm.tolist(), n, precision, recall, dict(manifest or {}))


def evaluate(model: DpcModel, test_pairs: PairDataset) -> EvalReport:
    if model.property_name != test_pairs.property_name:
        raise InvalidConfig(f"model predicts {model.property_name!r}, pairs are labelled by {test_pairs.property_name!r}")
    X = test_pairs.features()
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(f"model expects {model.n_features} features, pairs have {X.shape[1]}")
    pred = model.predict_indexed(X, test_pairs.first, test_pairs.second)
    manifest = {
        "model_kind": model.kind,
        "architecture": model.architecture,
        "property": model.property_name,
        "threshold": test_pairs.threshold.to_dict(),
        "model_threshold": model.threshold.to_dict(),
        "model_fingerprint": model.manifest.get("dataset_fingerprint"),
        "model_seed": model.manifest.get("seed"),
    }
    return confusion_report(test_pairs.labels, pred, manifest)


def _z_value(level: float) -> float:
    if level == 0.95:
        return 1.96
    return statistics.NormalDist().inv_cdf(0.5 + level / 2.0)


def confidence_interval(values: Sequence[float], level: float = 0.95) -> tuple[float, float]:
    """``(mean, halfwidth)`` with halfwidth ``z * s / sqrt(n)`` (z = 1.96 at 95%)."""
    values = [float(v) for v in values]
    if len(values) < 2:
        raise TooFewValues(f"need at least 2 values for an interval, got {len(values)}")
    if not 0.0 < level < 1.0:
        raise InvalidConfig(f"level must lie in (0, 1), got {level}")
    mean = statistics.fmean(values)
    s = statistics.stdev(values)
    return mean, _z_value(level) * s / math.sqrt(len(values))


@dataclass
class RepeatedEval:
    accuracies: list[float]
    mean: float
    halfwidth: float
    seeds: list[int]
    reports: list[EvalReport]

    def to_dict(self) -> dict:
        return {
            "accuracies": self.accuracies,
            "mean": self.mean,
            "halfwidth": self.halfwidth,
            "seeds": self.seeds,
            "ci_level": 0.95,
            "ci_method": CI_METHOD,
            "reports": [r.to_dict() for r in self.reports],
        }

    def summary(self) -> str:
        return f"{100 * self.mean:.2f} +/- {100 * self.halfwidth:.2f}"


def repeated_eval(kind: str, architecture: str, train: Dataset, test_pairs: PairDataset,
                  n_repeats: int = 5, base_seed: int = 0, **train_kwargs) -> RepeatedEval:
    """Train and evaluate with seeds ``base_seed .. base_seed + n_repeats - 1``.

    ``train_kwargs`` go to :func:`train_backbone` (params, max_pairs, ...);
    the training threshold is the one carried by ``test_pairs``.
    """
    if n_repeats < 2:
        raise TooFewValues(f"need at least 2 repeats for an interval, got {n_repeats}")
    seeds = [base_seed + r for r in range(n_repeats)]
    reports = []
    for s in seeds:
        model = train_backbone(kind, architecture, train, test_pairs.property_name, test_pairs.threshold,
                               seed=s, **train_kwargs)
        reports.append(evaluate(model, test_pairs))
    accs = [r.accuracy for r in reports]
    mean, half = confidence_interval(accs)
    return RepeatedEval(accs, mean, half, seeds, reports)


@dataclass
class CurvePoint:
    k: int
    accuracies: list[float]
    experiments: list[list[str]]
    mean: float
    halfwidth: float


@dataclass
class LearningCurve:
    points: list[CurvePoint]

    def to_dict(self) -> dict:
        return {
            "ci_method": CI_METHOD,
            "points": [
                {"k": p.k, "accuracies": p.accuracies, "mean": p.mean, "halfwidth": p.halfwidth,
                 "experiments": p.experiments}
                for p in self.points
            ],
        }

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "repeat", "accuracy"])
        for p in self.points:
            for r, acc in enumerate(p.accuracies):
                w.writerow([p.k, r, repr(acc)])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"{'k':>4}{'mean':>10}{'+/-':>8}  accuracies"]
        for p in self.points:
            accs = " ".join(f"{100 * a:.2f}" for a in p.accuracies)
            lines.append(f"{p.k:>4}{100 * p.mean:>10.2f}{100 * p.halfwidth:>8.2f}  {accs}")
        return "\n".join(lines) + "\n"


def learning_curve(full_train: Dataset, test_pairs: PairDataset, kind: str, architecture: str,
                   ks: Sequence[int] = (3, 5, 7, 9, 11, 13, 15), repeats: int = 5, seed: int = 0,
                   **train_kwargs) -> LearningCurve:
    """Accuracy on a fixed test pair set versus number of training experiments.

    Each of the ``repeats`` subsets per k is drawn independently (no nesting
    across k) and keeps the experiments in their original order.
    """
    ks = [int(k) for k in ks]
    if not ks or any(k < 1 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise InvalidConfig(f"ks must be positive and strictly increasing, got {ks}")
    n = full_train.n_experiments
    if max(ks) > n:
        raise KTooLarge(f"k = {max(ks)} exceeds the {n} available training experiments")
    if repeats < 1:
        raise InvalidConfig("repeats must be >= 1")
    ids = full_train.experiment_ids
    points = []
    for k in ks:
        accs, chosen = [], []
        for r in range(repeats):
            rng = np.random.default_rng(derive_seed(seed, f"curve-subset:{k}:{r}"))
            pick = np.sort(rng.choice(n, size=k, replace=False))
            subset = [ids[i] for i in pick]
            model = train_backbone(kind, architecture, full_train.select(subset), test_pairs.property_name,
                                   test_pairs.threshold, seed=derive_seed(seed, f"curve-train:{k}:{r}"),
                                   **train_kwargs)
            accs.append(evaluate(model, test_pairs).accuracy)
            chosen.append(subset)
        if len(accs) >= 2:
            mean, half = confidence_interval(accs)
        else:
            mean, half = accs[0], 0.0
        points.append(CurvePoint(k, accs, chosen, mean, half))
    return LearningCurve(points)
