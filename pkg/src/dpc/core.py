"""Domain types, CSV ingestion, experiment-level splitting and thresholds."""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateSampleId,
    EmptyFile,
    InvalidConfig,
    MissingColumn,
    NonNumericCell,
    TooFewExperiments,
    TooFewValues,
    UnknownProperty,
)

ID_COLUMNS = ("experiment_id", "sample_id")


@dataclass(frozen=True)
class Sample:
    experiment_id: str
    sample_id: str
    features: tuple[float, ...]
    properties: Mapping[str, float] = field(hash=False)

    def value(self, name: str) -> float:
        try:
            return self.properties[name]
        except KeyError:
            raise UnknownProperty(f"sample {self.sample_id!r} has no property {name!r}") from None


@dataclass(frozen=True)
class Dataset:
    """Samples grouped by experiment, in file order.

    Feature values stay in physical units; any scaling happens inside the
    learners.
    """

    experiments: tuple[tuple[str, tuple[Sample, ...]], ...]
    feature_names: tuple[str, ...]
    property_names: tuple[str, ...]

    def __post_init__(self):
        ids = [eid for eid, _ in self.experiments]
        if any(not eid for eid in ids):
            raise InvalidConfig("experiment ids must be non-empty")
        if len(set(ids)) != len(ids):
            raise InvalidConfig("experiment ids must be unique")
        d = len(self.feature_names)
        for eid, samples in self.experiments:
            if not samples:
                raise InvalidConfig(f"experiment {eid!r} has no samples")
            for s in samples:
                if len(s.features) != d:
                    raise InvalidConfig(f"sample {s.sample_id!r} has {len(s.features)} features, expected {d}")
                if set(s.properties) != set(self.property_names):
                    raise InvalidConfig(f"sample {s.sample_id!r} has properties {sorted(s.properties)}")

    @classmethod
    def from_samples(cls, samples: Iterable[Sample], feature_names, property_names) -> "Dataset":
        groups: dict[str, list[Sample]] = {}
        for s in samples:
            groups.setdefault(s.experiment_id, []).append(s)
        return cls(
            tuple((eid, tuple(ss)) for eid, ss in groups.items()),
            tuple(feature_names),
            tuple(property_names),
        )

    @property
    def experiment_ids(self) -> list[str]:
        return [eid for eid, _ in self.experiments]

    @property
    def n_experiments(self) -> int:
        return len(self.experiments)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def samples(self) -> list[Sample]:
        return [s for _, ss in self.experiments for s in ss]

    def __len__(self) -> int:
        return sum(len(ss) for _, ss in self.experiments)

    def features(self) -> np.ndarray:
        return np.array([s.features for s in self.samples()], dtype=float).reshape(len(self), self.n_features)

    def values(self, name: str) -> np.ndarray:
        if name not in self.property_names:
            raise UnknownProperty(f"unknown property {name!r}; dataset has {list(self.property_names)}")
        return np.array([s.properties[name] for s in self.samples()], dtype=float)

    def select(self, experiment_ids: Sequence[str]) -> "Dataset":
        """Sub-dataset holding the named experiments, in the order given."""
        lookup = dict(self.experiments)
        missing = [eid for eid in experiment_ids if eid not in lookup]
        if missing:
            raise InvalidConfig(f"unknown experiment ids: {missing}")
        return Dataset(
            tuple((eid, lookup[eid]) for eid in experiment_ids),
            self.feature_names,
            self.property_names,
        )

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*ID_COLUMNS, *self.feature_names, *self.property_names])
        for s in self.samples():
            w.writerow(
                [s.experiment_id, s.sample_id]
                + [repr(float(v)) for v in s.features]
                + [repr(float(s.properties[p])) for p in self.property_names]
            )
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv_text(), encoding="utf-8")

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_csv_text().encode("utf-8")).hexdigest()


def _parse_cell(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise NonNumericCell(row, column, text) from None
    if not math.isfinite(value):
        raise NonNumericCell(row, column, text)
    return value


def parse_dataset(text: str, property_names: Sequence[str]) -> Dataset:
    """Parse CSV text; see :func:`load_dataset`.

    Data rows are numbered from 1 (the header is not counted) in errors.
    """
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows:
        raise EmptyFile("dataset file is empty")
    header = [h.strip() for h in rows[0]]
    for col in (*ID_COLUMNS, *property_names):
        if col not in header:
            raise MissingColumn(f"column {col!r} not found in header {header}")
    if len(set(header)) != len(header):
        raise InvalidConfig(f"duplicate column names in header {header}")
    data = rows[1:]
    if not data:
        raise EmptyFile("dataset file has a header but no rows")

    prop_set = set(property_names)
    feature_names = [h for h in header if h not in ID_COLUMNS and h not in prop_set]
    if not feature_names:
        raise MissingColumn("no feature columns left after removing id and property columns")
    index = {h: i for i, h in enumerate(header)}

    seen: set[tuple[str, str]] = set()
    samples = []
    for rownum, r in enumerate(data, start=1):
        if len(r) != len(header):
            raise InvalidConfig(f"row {rownum} has {len(r)} cells, header has {len(header)}")
        eid = r[index["experiment_id"]].strip()
        sid = r[index["sample_id"]].strip()
        if not eid:
            raise InvalidConfig(f"row {rownum} has an empty experiment_id")
        if (eid, sid) in seen:
            raise DuplicateSampleId(f"sample {sid!r} appears twice in experiment {eid!r} (row {rownum})")
        seen.add((eid, sid))
        feats = tuple(_parse_cell(r[index[f]].strip(), rownum, f) for f in feature_names)
        props = {p: _parse_cell(r[index[p]].strip(), rownum, p) for p in property_names}
        samples.append(Sample(eid, sid, feats, props))
    return Dataset.from_samples(samples, feature_names, property_names)


def load_dataset(path, property_names: Sequence[str]) -> Dataset:
    """Read a dataset CSV.

    Columns ``experiment_id`` and ``sample_id`` are required; the columns
    named in ``property_names`` hold material properties and every other
    column is a process-parameter feature, kept in file order.  Rows keep
    file order within their experiment; experiments are ordered by first
    appearance.  Empty or non-finite cells are rejected, never imputed.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_dataset(text, property_names)


def split_by_experiment(ds: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    n = ds.n_experiments
    if n < 2:
        raise TooFewExperiments(f"need at least 2 experiments to split, got {n}")
    if not 0.0 < train_fraction < 1.0:
        raise InvalidConfig(f"train_fraction must lie in (0, 1), got {train_fraction}")
    order = np.random.default_rng(seed).permutation(n)
    # round half up, then keep both sides non-empty
    n_train = int(math.floor(train_fraction * n + 0.5))
    n_train = min(max(n_train, 1), n - 1)
    ids = ds.experiment_ids
    train_ids = [ids[i] for i in order[:n_train]]
    test_ids = [ids[i] for i in order[n_train:]]
    return ds.select(train_ids), ds.select(test_ids)


@dataclass(frozen=True)
class Threshold:
    """The "same within t" tolerance on property differences.

    ``kind`` is ``"absolute"`` or ``"std_fraction"``; for the latter
    ``fraction`` records the recipe and ``value`` the resolved t.
    """

    value: float
    kind: str = "absolute"
    fraction: float | None = None

    def __post_init__(self):
        if not (self.value >= 0.0 and math.isfinite(self.value)):
            raise InvalidConfig(f"threshold must be finite and non-negative, got {self.value}")
        if self.kind not in ("absolute", "std_fraction"):
            raise InvalidConfig(f"unknown threshold kind {self.kind!r}")

    @classmethod
    def absolute(cls, value: float) -> "Threshold":
        return cls(float(value), "absolute")

    def to_dict(self) -> dict:
        if self.kind == "std_fraction":
            return {"kind": "std_fraction", "fraction": self.fraction, "resolved": self.value}
        return {"kind": "absolute", "value": self.value}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Threshold":
        if d["kind"] == "std_fraction":
            return cls(float(d["resolved"]), "std_fraction", float(d["fraction"]))
        return cls(float(d["value"]), "absolute")


def compute_threshold(values: Sequence[float], fraction: float) -> Threshold:
    """``fraction`` times the sample standard deviation (n - 1 denominator)."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise TooFewValues(f"need at least 2 values for a standard deviation, got {v.size}")
    if fraction < 0:
        raise InvalidConfig(f"fraction must be non-negative, got {fraction}")
    return Threshold(float(fraction) * float(np.std(v, ddof=1)), "std_fraction", float(fraction))
