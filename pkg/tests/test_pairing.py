import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpc.core import Threshold
from dpc.errors import InvalidConfig, UnknownProperty
from dpc.pairing import (
    FIRST_HIGHER,
    SAME,
    SECOND_HIGHER,
    build_pair_dataset,
    class_balance,
    label_pair,
    label_pairs,
    subsample_pairs,
    swap_label,
)

from conftest import make_dataset

finite = st.floats(-1e9, 1e9, allow_nan=False)
nonneg = st.floats(0, 1e9, allow_nan=False)


def reference_label(y1, y2, t):
    d = y1 - y2
    if d > t:
        return 1
    elif -d > t:
        return 2
    else:
        return 0


def test_label_examples():
    assert label_pair(10.0, 5.0, 1.0) == FIRST_HIGHER
    assert label_pair(5.0, 10.0, 1.0) == SECOND_HIGHER
    assert label_pair(1739.4, 1739.9, 1.0) == SAME
    assert label_pair(3.0, 1.0, 2.0) == SAME  # |diff| == t is "same"
    assert label_pair(3.0, 1.0, 1.999) == FIRST_HIGHER


@given(finite, finite, nonneg)
def test_label_matches_reference_and_vectorized(y1, y2, t):
    z = label_pair(y1, y2, t)
    assert z == reference_label(y1, y2, t)
    assert label_pairs([y1], [y2], t)[0] == z


@given(finite, finite, nonneg)
def test_swap_antisymmetry(y1, y2, t):
    assert label_pair(y2, y1, t) == swap_label(label_pair(y1, y2, t))


@given(finite, nonneg)
def test_identity_is_same(y, t):
    assert label_pair(y, y, t) == SAME


def test_three_point_matrix(three_points, unit_threshold):
    pd = build_pair_dataset(three_points.samples(), "y", unit_threshold)
    assert pd.labels.reshape(3, 3).tolist() == [[0, 2, 2], [1, 0, 2], [1, 1, 0]]
    assert class_balance(pd) == {0: 3, 1: 3, 2: 3}
    assert list(pd.first) == [0, 0, 0, 1, 1, 1, 2, 2, 2]
    assert list(pd.second) == [0, 1, 2] * 3


def test_pair_counts():
    ds = make_dataset(np.arange(40.0))
    assert len(build_pair_dataset(ds.samples(), "y", Threshold.absolute(0.5))) == 1600
    one = build_pair_dataset(make_dataset([3.0]).samples(), "y", Threshold.absolute(0.0))
    assert len(one) == 1 and one.labels[0] == SAME
    with pytest.raises(InvalidConfig):
        build_pair_dataset([], "y", Threshold.absolute(0.0))
    with pytest.raises(UnknownProperty):
        build_pair_dataset(ds.samples(), "z", Threshold.absolute(0.0))


@given(st.lists(finite, min_size=1, max_size=12), nonneg)
def test_pairs_are_swap_closed(values, t):
    pd = build_pair_dataset(make_dataset(values).samples(), "y", Threshold.absolute(t))
    k = len(values)
    M = pd.labels.reshape(k, k)
    assert np.array_equal(M.T, swap_label(M))
    assert np.all(np.diag(M) == SAME)
    assert np.array_equal(pd.relabel(), pd.labels)
    bal = class_balance(pd)
    assert bal[1] == bal[2] and sum(bal.values()) == k * k


@given(st.sets(st.integers(-10**6, 10**6), min_size=1, max_size=25))
def test_class_balance_limits(values):
    values = [float(v) for v in values]
    k = len(values)
    samples = make_dataset(values).samples()
    assert class_balance(build_pair_dataset(samples, "y", Threshold.absolute(0.0)))[0] == k
    spread = max(values) - min(values)
    assert class_balance(build_pair_dataset(samples, "y", Threshold.absolute(spread + 1.0)))[0] == k * k


def test_pair_features_concatenate():
    ds = make_dataset([1.0, 2.0], features=[[1.0, 2.0], [3.0, 4.0]])
    pd = build_pair_dataset(ds.samples(), "y", Threshold.absolute(0.0))
    assert pd.pair_features().tolist() == [[1, 2, 1, 2], [1, 2, 3, 4], [3, 4, 1, 2], [3, 4, 3, 4]]


def test_subsample():
    pd = build_pair_dataset(make_dataset(np.arange(40.0)).samples(), "y", Threshold.absolute(0.5))
    assert subsample_pairs(pd, 2000, 0) is pd
    a = subsample_pairs(pd, 100, 7)
    b = subsample_pairs(pd, 100, 7)
    assert len(a) == 100
    assert np.array_equal(a.first, b.first) and np.array_equal(a.second, b.second)
    assert np.array_equal(a.labels, a.relabel())
    small = build_pair_dataset(make_dataset([0.0, 1.0, 2.0]).samples(), "y", Threshold.absolute(0.5))
    same = subsample_pairs(small, 9, 1)
    assert np.array_equal(same.first, small.first)
    with pytest.raises(InvalidConfig):
        subsample_pairs(pd, 0, 0)


def test_pairs_read_only_and_csv():
    pd = build_pair_dataset(make_dataset([0.0, 10.0]).samples(), "y", Threshold.absolute(1.0))
    with pytest.raises(ValueError):
        pd.labels[0] = 2
    lines = pd.to_csv_text().splitlines()
    assert lines[0].startswith("i1,i2,")
    assert lines[2].endswith(",0.0,10.0,2")
