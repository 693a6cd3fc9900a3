"""Synthetic multi-experiment process/property datasets with known ground truth.

Each experiment draws a process-parameter centre and a shared property
offset; its samples jitter around the centre and add their own measurement
noise.  The shared offset is what makes samples of one experiment look
alike, so splitting by experiment matters.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import Dataset, Sample, Threshold
from .errors import InvalidConfig, UnknownProperty
from .pairing import PairDataset, build_pair_dataset

FEATURES = ("feed_rate", "rotation_rate", "billet_temp", "heat_treat_time", "homogenized", "temper")
BINARY = ("homogenized", "temper")

DEFAULT_RANGES = {
    "feed_rate": (1.0, 7.5),  # mm/min
    "rotation_rate": (150.0, 450.0),  # rpm
    "billet_temp": (400.0, 520.0),  # degC; does not enter any ground truth
    "heat_treat_time": (4.0, 24.0),  # h
    "homogenized": (0.0, 1.0),
    "temper": (0.0, 1.0),  # 0 = T5, 1 = T6
}

# g = c0 + a*feed^2 + b*rot + c*feed*rot + d*heat + e*homogenized + f*temper
COEFFICIENTS = {
    "uts": (470.0, -1.6, 0.10, 0.012, 1.2, 14.0, 22.0),  # MPa, std ~ 28 over the ranges
    "yield_strength": (400.0, -1.3, 0.08, 0.010, 1.5, 10.0, 26.0),  # MPa
    "max_load": (1600.0, -4.8, 0.30, 0.036, 3.6, 42.0, 66.0),  # kg
}
# multiplies the configured noise std per property (max_load lives on a ~3x larger scale)
NOISE_SCALE = {"uts": 1.0, "yield_strength": 1.0, "max_load": 3.0}

TRUTH_FUNCTIONS = ("quadratic_interaction", "linear")


@dataclass(frozen=True)
class SynthConfig:
    n_experiments: int = 20
    samples_per_experiment: int = 10
    experiment_noise: float = 5.0  # std of the per-experiment property offset
    sample_noise: float = 2.0  # std of the per-sample measurement noise
    jitter: float = 0.15  # per-sample feature jitter, fraction of each range
    properties: tuple[str, ...] = ("uts", "yield_strength", "max_load")
    truth: str = "quadratic_interaction"
    seed: int = 0
    ranges: dict = field(default_factory=lambda: dict(DEFAULT_RANGES))

    def __post_init__(self):
        object.__setattr__(self, "properties", tuple(self.properties))
        if self.n_experiments < 1 or self.samples_per_experiment < 1:
            raise InvalidConfig("n_experiments and samples_per_experiment must be >= 1")
        if self.experiment_noise < 0 or self.sample_noise < 0 or self.jitter < 0:
            raise InvalidConfig("noise levels and jitter must be >= 0")
        if self.truth not in TRUTH_FUNCTIONS:
            raise InvalidConfig(f"unknown ground-truth function {self.truth!r}; choose from {TRUTH_FUNCTIONS}")
        unknown = [p for p in self.properties if p not in COEFFICIENTS]
        if unknown or not self.properties:
            raise InvalidConfig(f"properties must be a non-empty subset of {sorted(COEFFICIENTS)}, got {self.properties}")
        if set(self.ranges) != set(FEATURES):
            raise InvalidConfig(f"ranges must cover exactly {FEATURES}")
        for name, (lo, hi) in self.ranges.items():
            if not lo < hi:
                raise InvalidConfig(f"empty range for {name}: {lo}..{hi}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["properties"] = list(self.properties)
        d["ranges"] = {k: list(v) for k, v in self.ranges.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        d = dict(d)
        if "ranges" in d:
            d["ranges"] = {k: tuple(v) for k, v in d["ranges"].items()}
        try:
            return cls(**d)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from None


@dataclass(frozen=True)
class GroundTruth:
    """Exact, noiseless property function ``g(x)`` over the six features."""

    function: str
    coefficients: dict

    def evaluate(self, X, property_name: str) -> np.ndarray:
        if property_name not in self.coefficients:
            raise UnknownProperty(f"ground truth has no property {property_name!r}")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        c0, a, b, c, d, e, f = self.coefficients[property_name]
        feed, rot, heat = X[:, 0], X[:, 1], X[:, 3]
        hom, tem = X[:, 4], X[:, 5]
        out = c0 + b * rot + d * heat + e * hom + f * tem
        if self.function == "quadratic_interaction":
            out = out + a * feed * feed + c * feed * rot
        return out

    def __call__(self, x, property_name: str) -> float:
        return float(self.evaluate(x, property_name)[0])

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "features": list(FEATURES),
            "form": "c0 + a*feed_rate^2 + b*rotation_rate + c*feed_rate*rotation_rate"
                    " + d*heat_treat_time + e*homogenized + f*temper",
            "coefficients": {k: list(v) for k, v in self.coefficients.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(d["function"], {k: tuple(float(x) for x in v) for k, v in d["coefficients"].items()})


def ground_truth(config: SynthConfig) -> GroundTruth:
    return GroundTruth(config.truth, {p: COEFFICIENTS[p] for p in config.properties})


def generate(config: SynthConfig) -> tuple[Dataset, GroundTruth]:
    truth = ground_truth(config)
    rng = np.random.default_rng(config.seed)
    lo = np.array([config.ranges[f][0] for f in FEATURES])
    hi = np.array([config.ranges[f][1] for f in FEATURES])
    binary = np.array([f in BINARY for f in FEATURES])
    width_e = len(str(config.n_experiments))
    width_s = len(str(config.samples_per_experiment))

    samples = []
    for e in range(config.n_experiments):
        eid = f"E{e + 1:0{width_e}d}"
        centre = rng.uniform(lo, hi)
        centre[binary] = rng.integers(0, 2, size=int(binary.sum()))
        offsets = {p: rng.normal(0.0, config.experiment_noise * NOISE_SCALE[p]) for p in config.properties}
        n = config.samples_per_experiment
        jit = rng.uniform(-1.0, 1.0, size=(n, len(FEATURES))) * config.jitter * (hi - lo)
        X = np.clip(centre + jit, lo, hi)
        X[:, binary] = centre[binary]
        noise = {p: rng.normal(0.0, config.sample_noise * NOISE_SCALE[p], size=n) for p in config.properties}
        values = {p: truth.evaluate(X, p) + offsets[p] + noise[p] for p in config.properties}
        for s in range(n):
            samples.append(Sample(
                eid,
                f"{eid}-S{s + 1:0{width_s}d}",
                tuple(float(v) for v in X[s]),
                {p: float(values[p][s]) for p in config.properties},
            ))
    return Dataset.from_samples(samples, FEATURES, config.properties), truth


def denoised(ds: Dataset, truth: GroundTruth) -> Dataset:
    """Copy of ``ds`` with every property replaced by its noiseless value."""
    X = ds.features()
    clean = {p: truth.evaluate(X, p) for p in ds.property_names}
    samples = [
        Sample(s.experiment_id, s.sample_id, s.features, {p: float(clean[p][i]) for p in ds.property_names})
        for i, s in enumerate(ds.samples())
    ]
    return Dataset.from_samples(samples, ds.feature_names, ds.property_names)


def oracle_labels(ds: Dataset, truth: GroundTruth, t: Threshold, property_name: str) -> PairDataset:
    """Exhaustive pairs labelled from ``g(x)`` rather than measured values."""
    return build_pair_dataset(denoised(ds, truth).samples(), property_name, t)


def write_truth_manifest(path, config: SynthConfig, truth: GroundTruth) -> None:
    doc = {"config": config.to_dict(), "ground_truth": truth.to_dict(), "noise_scale": NOISE_SCALE}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_truth_manifest(path) -> GroundTruth:
    with open(path, encoding="utf-8") as fh:
        return GroundTruth.from_dict(json.load(fh)["ground_truth"])
