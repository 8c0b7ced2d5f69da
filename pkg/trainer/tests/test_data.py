"""Dataset ingestion and windowing, cross-checked against the runtime side."""

import json

import numpy as np
import pytest

from switch_trainer.data import DatasetError, load_dataset, split_indices, window_stream

from conftest import write_dataset


def test_single_step_episode_pads_fully(tmp_path):
    path = write_dataset(tmp_path / "one.jsonl", streams=1, stream_len=1, t_seq=10)
    samples = load_dataset([path])
    assert len(samples) == 1
    win = samples.windows[0]
    assert win.shape == (10, 16 + 17)
    assert (win == win[0]).all()


def test_300_records_make_300_samples(tmp_path):
    path = write_dataset(tmp_path / "d.jsonl", streams=3, stream_len=100)
    samples = load_dataset([path])
    assert len(samples) == 300
    assert samples.windows.shape == (300, 5, 33)


def test_windowing_matches_runtime_stack(tmp_path):
    fieldnav_learned = pytest.importorskip("fieldnav.learned")
    rng = np.random.default_rng(3)
    rows = [rng.normal(size=7) for _ in range(23)]
    for t_seq in (1, 4, 10, 23, 30):
        windows = window_stream(rows, t_seq)
        for i, win in enumerate(windows):
            expect = fieldnav_learned.stack(rows[: i + 1], t_seq)
            np.testing.assert_allclose(win, expect, atol=1e-9)


def test_m_mismatch_across_files_rejected(tmp_path):
    a = write_dataset(tmp_path / "a.jsonl", m=16)
    b = write_dataset(tmp_path / "b.jsonl", m=32)
    with pytest.raises(DatasetError):
        load_dataset([a, b])


def test_bad_observation_length_rejected(tmp_path):
    path = tmp_path / "bad.jsonl"
    with open(path, "w") as f:
        f.write(json.dumps({"version": 1, "M": 16, "T_seq": 5,
                            "controlled_ids": [0], "scenario_hash": "x"}) + "\n")
        f.write(json.dumps({"episode": 0, "t": 1, "robot": 0,
                            "observation": [0.0] * 10, "label": 0}) + "\n")
    with pytest.raises(DatasetError):
        load_dataset([path])


def test_split_deterministic_and_80_20():
    a_train, a_test = split_indices(1000, seed=7)
    b_train, b_test = split_indices(1000, seed=7)
    np.testing.assert_array_equal(a_train, b_train)
    np.testing.assert_array_equal(a_test, b_test)
    assert len(a_train) == 800 and len(a_test) == 200
    assert set(a_train) | set(a_test) == set(range(1000))
    c_train, _ = split_indices(1000, seed=8)
    assert not np.array_equal(a_train, c_train)


def test_labels_follow_force_feature(dataset_file):
    samples = load_dataset([dataset_file])
    f = samples.windows[:, -1, 16 + 14]
    np.testing.assert_array_equal(samples.labels, (f < 5.0).astype(np.float32))
