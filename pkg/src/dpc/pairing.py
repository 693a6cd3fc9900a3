"""Pairwise 3-way datasets.

Label 1 means the first sample's property exceeds the second's by more than
t, label 2 the reverse, label 0 that the two are the same within t.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Sample, Threshold
from .errors import InvalidConfig, UnknownProperty

SAME, FIRST_HIGHER, SECOND_HIGHER = 0, 1, 2
LABELS = (SAME, FIRST_HIGHER, SECOND_HIGHER)


def label_pair(y1: float, y2: float, t: float) -> int:
    # |y1 - y2| == t falls through to "same"
    if y1 - y2 > t:
        return FIRST_HIGHER
    if y2 - y1 > t:
        return SECOND_HIGHER
    return SAME


def label_pairs(y1, y2, t: float) -> np.ndarray:
    """Vectorized :func:`label_pair`; identical results element by element."""
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    out = np.zeros(np.broadcast(y1, y2).shape, dtype=np.int64)
    out[y2 - y1 > t] = SECOND_HIGHER
    out[y1 - y2 > t] = FIRST_HIGHER
    return out


def swap_label(z):
    """Label of the swapped pair: 1 <-> 2, 0 stays."""
    return np.asarray([0, 2, 1])[np.asarray(z)]


@dataclass(frozen=True, eq=False)
class PairDataset:
    """Ordered pairs over ``samples`` stored as index arrays.

    ``first[i]``, ``second[i]`` index into ``samples`` and ``labels[i]`` is
    the pair's class.
    """

    samples: tuple[Sample, ...]
    first: np.ndarray
    second: np.ndarray
    labels: np.ndarray
    property_name: str
    threshold: Threshold

    def __post_init__(self):
        for a in (self.first, self.second, self.labels):
            a.setflags(write=False)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def pairs(self) -> list[tuple[Sample, Sample, int]]:
        return [
            (self.samples[i], self.samples[j], int(z))
            for i, j, z in zip(self.first, self.second, self.labels)
        ]

    def values(self) -> np.ndarray:
        return np.array([s.properties[self.property_name] for s in self.samples], dtype=float)

    def features(self) -> np.ndarray:
        """Per-sample feature matrix (not per pair)."""
        return np.array([s.features for s in self.samples], dtype=float)

    def pair_features(self) -> np.ndarray:
        """Concatenated ``[x1 | x2]`` rows, one per pair."""
        X = self.features()
        return np.hstack([X[self.first], X[self.second]])

    def relabel(self) -> np.ndarray:
        """Labels recomputed from the stored samples and threshold."""
        y = self.values()
        return label_pairs(y[self.first], y[self.second], self.threshold.value)

    def take(self, index) -> "PairDataset":
        index = np.asarray(index, dtype=np.int64)
        return PairDataset(
            self.samples,
            self.first[index].copy(),
            self.second[index].copy(),
            self.labels[index].copy(),
            self.property_name,
            self.threshold,
        )

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i1", "i2", "experiment_id_1", "sample_id_1", "experiment_id_2", "sample_id_2", "y1", "y2", "label"])
        y = self.values()
        for i, j, z in zip(self.first, self.second, self.labels):
            a, b = self.samples[i], self.samples[j]
            w.writerow([int(i), int(j), a.experiment_id, a.sample_id, b.experiment_id, b.sample_id,
                        repr(float(y[i])), repr(float(y[j])), int(z)])
        return buf.getvalue()


def build_pair_dataset(samples: Sequence[Sample], property_name: str, t: Threshold) -> PairDataset:
    """All k*k ordered pairs, self-pairs included, in (i1, i2) lexicographic order."""
    samples = tuple(samples)
    if not samples:
        raise InvalidConfig("cannot build pairs from an empty sample list")
    for s in samples:
        if property_name not in s.properties:
            raise UnknownProperty(f"sample {s.sample_id!r} has no property {property_name!r}")
    k = len(samples)
    y = np.array([s.properties[property_name] for s in samples], dtype=float)
    first = np.repeat(np.arange(k), k)
    second = np.tile(np.arange(k), k)
    labels = label_pairs(y[first], y[second], t.value)
    return PairDataset(samples, first, second, labels, property_name, t)


def subsample_pairs(pd: PairDataset, max_pairs: int, seed: int) -> PairDataset:
    if max_pairs < 1:
        raise InvalidConfig(f"max_pairs must be >= 1, got {max_pairs}")
    if len(pd) <= max_pairs:
        return pd
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(len(pd), size=max_pairs, replace=False))
    return pd.take(keep)


def class_balance(pd: PairDataset) -> dict[int, int]:
    counts = np.bincount(pd.labels, minlength=3)
    return {z: int(counts[z]) for z in LABELS}
