import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpc.core import Threshold, compute_threshold
from dpc.errors import InvalidConfig
from dpc.pairing import build_pair_dataset
from dpc.synthgen import (
    FEATURES,
    GroundTruth,
    SynthConfig,
    generate,
    oracle_labels,
    read_truth_manifest,
    write_truth_manifest,
)

from conftest import make_dataset


def test_default_shape():
    ds, _ = generate(SynthConfig())
    assert len(ds) == 200
    assert ds.n_experiments == 20
    assert ds.feature_names == FEATURES


def test_same_seed_bit_identical():
    a, _ = generate(SynthConfig(seed=42))
    b, _ = generate(SynthConfig(seed=42))
    assert a.to_csv_text() == b.to_csv_text()
    c, _ = generate(SynthConfig(seed=43))
    assert c.to_csv_text() != a.to_csv_text()


def test_zero_noise_is_ground_truth():
    ds, truth = generate(SynthConfig(experiment_noise=0.0, sample_noise=0.0, seed=1))
    for p in ds.property_names:
        assert np.array_equal(ds.values(p), truth.evaluate(ds.features(), p))
    t = compute_threshold(ds.values("uts"), 0.01)
    a = oracle_labels(ds, truth, t, "uts")
    b = build_pair_dataset(ds.samples(), "uts", t)
    assert np.array_equal(a.labels, b.labels)


def test_huge_threshold_all_same():
    ds, truth = generate(SynthConfig(n_experiments=3, seed=2))
    assert np.all(oracle_labels(ds, truth, Threshold.absolute(1e9), "uts").labels == 0)


def test_three_handpicked_points():
    # linear truth with only the heat_treat_time term: g = x3
    truth = GroundTruth("linear", {"y": (0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)})
    X = np.zeros((3, 6))
    X[:, 3] = [0.0, 10.0, 20.0]
    ds = make_dataset([99.0, 99.0, 99.0], features=X)
    pd = oracle_labels(ds, truth, Threshold.absolute(1.0), "y")
    assert pd.labels.reshape(3, 3).tolist() == [[0, 2, 2], [1, 0, 2], [1, 1, 0]]


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), jitter=st.floats(0.0, 2.0))
def test_features_within_ranges(seed, jitter):
    cfg = SynthConfig(n_experiments=5, samples_per_experiment=4, jitter=jitter, seed=seed)
    ds, _ = generate(cfg)
    X = ds.features()
    for j, name in enumerate(FEATURES):
        lo, hi = cfg.ranges[name]
        assert X[:, j].min() >= lo and X[:, j].max() <= hi
    assert set(np.unique(X[:, 4])) <= {0.0, 1.0}
    for _, samples in ds.experiments:
        assert len({s.features[5] for s in samples}) == 1


def test_disagreement_grows_with_sample_noise():
    base = SynthConfig(n_experiments=8, samples_per_experiment=5, experiment_noise=0.0, sample_noise=0.0)
    _, truth = generate(base)
    clean, _ = generate(base)
    t = compute_threshold(clean.values("uts"), 0.01)
    rates = []
    for mult in (0.0, 0.5, 1.0, 2.0, 5.0):
        per_seed = []
        for seed in range(5):
            cfg = SynthConfig(n_experiments=8, samples_per_experiment=5, experiment_noise=0.0,
                              sample_noise=mult * t.value, seed=seed)
            ds, truth = generate(cfg)
            measured = build_pair_dataset(ds.samples(), "uts", t).labels
            per_seed.append(np.mean(measured != oracle_labels(ds, truth, t, "uts").labels))
        rates.append(np.mean(per_seed))
    assert rates[0] == 0.0
    assert all(b >= a for a, b in zip(rates, rates[1:]))


def test_manifest_round_trip(tmp_path):
    cfg = SynthConfig(n_experiments=2, truth="linear")
    _, truth = generate(cfg)
    write_truth_manifest(tmp_path / "truth.json", cfg, truth)
    assert read_truth_manifest(tmp_path / "truth.json") == truth
    assert SynthConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize("bad", [
    {"n_experiments": 0},
    {"samples_per_experiment": 0},
    {"sample_noise": -1.0},
    {"truth": "cubic"},
    {"properties": ("elongation",)},
])
def test_invalid_config(bad):
    with pytest.raises(InvalidConfig):
        SynthConfig(**bad)
