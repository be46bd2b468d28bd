import numpy as np
import pytest

from synapse_cascade.errors import IngestionError, InvalidInputError
from synapse_cascade.patterns import (
    PatternStream,
    ingest_features,
    make_random_stream,
    read_feature_file,
    write_feature_file,
)


def test_random_stream_deterministic():
    a = make_random_stream(4, 1, seed=7)
    b = make_random_stream(4, 1, seed=7)
    assert np.array_equal(a.patterns, b.patterns)
    assert np.all(np.abs(a.patterns) == 1)


def test_random_stream_mean_concentration():
    s = make_random_stream(128, 1000, seed=3)
    mean = s.patterns.astype(float).mean()
    assert abs(mean) <= 3.0 / np.sqrt(128 * 1000)


def test_random_streams_differ_across_seeds():
    a = make_random_stream(16, 10, seed=1)
    b = make_random_stream(16, 10, seed=2)
    assert not np.array_equal(a.patterns, b.patterns)


def test_pattern_stream_validation():
    with pytest.raises(InvalidInputError):
        PatternStream(patterns=np.array([[0, 1], [1, -1]]))


def test_ingest_sign_preserving_on_orthogonal_design():
    # orthogonal columns with distinct variances: components are the axes
    h = np.array(
        [
            [1, 1, 1, 1],
            [1, -1, 1, -1],
            [1, 1, -1, -1],
            [1, -1, -1, 1],
        ],
        dtype=float,
    )
    x = np.vstack([h, -h]) * np.array([4.0, 3.0, 2.0, 1.0])
    stream = ingest_features(x, 4)
    raw_signs = np.where(np.vstack([h, -h]) > 0, 1, -1)
    for j in range(4):
        col = stream.patterns[:, j]
        matches = [
            np.array_equal(col, s * raw_signs[:, k]) for k in range(4) for s in (1, -1)
        ]
        assert any(matches)


def test_ingest_median_balance():
    rng = np.random.default_rng(5)
    even = ingest_features(rng.normal(size=(40, 8)), 5)
    counts = even.patterns.sum(axis=0)
    assert np.all(counts == 0)
    odd = ingest_features(rng.normal(size=(41, 8)), 5)
    counts = odd.patterns.sum(axis=0)
    assert np.all(np.abs(counts) == 1)


def test_ingest_cluster_structure():
    rng = np.random.default_rng(11)
    c1 = rng.normal(0.0, 0.3, size=(20, 12)) + np.array([5.0] * 6 + [0.0] * 6)
    c2 = rng.normal(0.0, 0.3, size=(20, 12)) + np.array([0.0] * 6 + [5.0] * 6)
    stream = ingest_features(np.vstack([c1, c2]), 6)
    p = stream.patterns.astype(float)
    def mean_hamming(a, b):
        total = 0.0
        pairs = 0
        for i in range(a.shape[0]):
            for j in range(b.shape[0]):
                total += np.sum(a[i] != b[j])
                pairs += 1
        return total / pairs
    within = 0.5 * (mean_hamming(p[:20], p[:20]) + mean_hamming(p[20:], p[20:]))
    between = mean_hamming(p[:20], p[20:])
    assert within < between


def test_ingest_rank_deficiency():
    rng = np.random.default_rng(2)
    base = rng.normal(size=(30, 2))
    wide = base @ rng.normal(size=(2, 10))  # rank 2 in 10 columns
    with pytest.raises(InvalidInputError):
        ingest_features(wide, 5)


def test_ingest_needs_enough_columns():
    with pytest.raises(InvalidInputError):
        ingest_features(np.random.default_rng(0).normal(size=(10, 3)), 4)


def test_feature_file_roundtrip_binary(tmp_path):
    rng = np.random.default_rng(9)
    mat = rng.normal(size=(12, 7)).astype(np.float32)
    path = tmp_path / "feats.fvec"
    write_feature_file(path, mat, binary=True)
    back = read_feature_file(path)
    assert back.shape == (12, 7)
    assert np.allclose(back, mat, atol=0.0)


def test_feature_file_roundtrip_csv(tmp_path):
    rng = np.random.default_rng(10)
    mat = rng.normal(size=(6, 4))
    path = tmp_path / "feats.csv"
    write_feature_file(path, mat, binary=False)
    back = read_feature_file(path)
    assert np.allclose(back, mat, atol=1e-6)


def test_feature_file_errors(tmp_path):
    bad = tmp_path / "trunc.fvec"
    bad.write_bytes(b"FVEC\x01\x00")
    with pytest.raises(IngestionError):
        read_feature_file(bad)
    mismatched = tmp_path / "short.fvec"
    import struct

    mismatched.write_bytes(b"FVEC" + struct.pack("<III", 4, 4, 0) + b"\x00" * 8)
    with pytest.raises(IngestionError):
        read_feature_file(mismatched)
    garbled = tmp_path / "bad.csv"
    garbled.write_text("1.0,2.0\nnot,a number\n")
    with pytest.raises(IngestionError):
        read_feature_file(garbled)
