import json

import numpy as np
import pytest

from harbench.data import (
    STANDARD_FIXTURE,
    ChannelMeta,
    Dataset,
    DatasetFormatError,
    Recording,
    SyntheticSpec,
    Trial,
    ar1_drift,
    default_channels,
    emit_dataset,
    generate_synthetic,
    ingest_dataset,
    is_unbalanced,
    standardize,
)

from .conftest import make_trial


def _write_trial(root, tid, header, rows):
    (root / "trials").mkdir(exist_ok=True)
    lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    (root / "trials" / f"{tid}.csv").write_text("\n".join(lines) + "\n")


def _meta(root, channels, trials, **extra):
    doc = {
        "format": "harbench-canonical",
        "version": 1,
        "layout": "trials",
        "name": "tiny",
        "sample_rate_hz": 50.0,
        "channels": [{"name": c, "sensor_kind": "accelerometer", "body_position": "wrist"} for c in channels],
        "trials": trials,
    }
    doc.update(extra)
    (root / "dataset.json").write_text(json.dumps(doc))


def test_ingest_two_trials(tmp_path):
    chans = ["acc_x", "acc_y", "acc_z"]
    _write_trial(tmp_path, "t1", chans, [[1, 2, 3], [4, 5, 6]])
    _write_trial(tmp_path, "t2", chans, [[0, 0, 0]] * 3)
    _meta(
        tmp_path,
        chans,
        [
            {"trial_id": "t1", "subject_id": "s1", "activity_label": "walk"},
            {"trial_id": "t2", "subject_id": "s2", "activity_label": "run"},
        ],
    )
    ds = ingest_dataset(tmp_path)
    assert len(ds.trials) == 2
    assert ds.trials[0].data.shape == (2, 3)
    assert ds.activities == ["run", "walk"]


def test_ingest_channel_mismatch(tmp_path):
    _write_trial(tmp_path, "t1", ["a", "b", "c"], [[1, 2, 3]])
    _meta(tmp_path, ["a", "b", "c", "d"], [{"trial_id": "t1", "subject_id": "s", "activity_label": "x"}])
    with pytest.raises(DatasetFormatError, match="channels"):
        ingest_dataset(tmp_path)


def test_ingest_rejects_non_numeric_and_missing(tmp_path):
    _write_trial(tmp_path, "t1", ["a"], [["oops"]])
    _meta(tmp_path, ["a"], [{"trial_id": "t1", "subject_id": "s", "activity_label": "x"}])
    with pytest.raises(DatasetFormatError, match="non-numeric"):
        ingest_dataset(tmp_path)
    with pytest.raises(DatasetFormatError, match="metadata"):
        ingest_dataset(tmp_path / "nowhere")


def test_ingest_continuous_layout(tmp_path):
    (tmp_path / "recordings").mkdir()
    rows = ["a,label"] + [f"{i},{lab}" for i, lab in enumerate("AAABB")]
    (tmp_path / "recordings" / "r1.csv").write_text("\n".join(rows) + "\n")
    doc = {
        "layout": "continuous",
        "name": "cont",
        "sample_rate_hz": 10,
        "channels": [{"name": "a"}],
        "recordings": [{"recording_id": "r1", "subject_id": "s1"}],
    }
    (tmp_path / "dataset.json").write_text(json.dumps(doc))
    ds = ingest_dataset(tmp_path)
    assert [len(t) for t in ds.trials] == [3, 2]
    assert [t.activity_label for t in ds.trials] == ["A", "B"]


def test_mhealth_shaped_round_trip(tmp_path):
    # 50 Hz, 12 activities, 10 subjects, 23 channels
    spec = SyntheticSpec(n_subjects=10, n_activities=12, trials_per_pair=1, trial_len_steps=60, n_channels=23)
    ds = generate_synthetic(spec, 5)
    emit_dataset(ds, tmp_path / "a")
    back = ingest_dataset(tmp_path / "a")
    assert back == ds
    emit_dataset(back, tmp_path / "b")
    assert ingest_dataset(tmp_path / "b") == ds
    assert len(back.activities) == 12 and len(back.subjects) == 10 and back.sample_rate_hz == 50.0


def test_trial_validation():
    ch = default_channels(2)
    with pytest.raises(DatasetFormatError):
        Trial("t", "s", "a", 50.0, ch, np.zeros((0, 2)))
    with pytest.raises(DatasetFormatError):
        Trial("t", "s", "a", 50.0, ch, np.zeros((4, 3)))
    with pytest.raises(DatasetFormatError):
        Trial("t", "s", "a", 50.0, ch, np.full((4, 2), np.nan))
    t = Trial("t", "s", "a", 50.0, ch, np.zeros((4, 2)))
    with pytest.raises(ValueError):
        t.data[0, 0] = 1.0


def test_dataset_rejects_mixed_rates_and_duplicates():
    a = make_trial("a", rate=50.0)
    with pytest.raises(DatasetFormatError, match="sample rate"):
        Dataset("d", (a, make_trial("b", rate=100.0)))
    with pytest.raises(DatasetFormatError, match="duplicate"):
        Dataset("d", (a, make_trial("a")))


def test_dataset_sorts_trials():
    ds = Dataset("d", (make_trial("b"), make_trial("a")))
    assert [t.trial_id for t in ds.trials] == ["a", "b"]


def _rec(labels, rid="r"):
    n = len(labels)
    return Recording(rid, "s", 50.0, default_channels(1), np.arange(n, dtype=float)[:, None], tuple(labels))


def test_standardize_splits_on_label_change():
    assert [len(t) for t in standardize([_rec("AAABB")]).trials] == [3, 2]
    assert len(standardize([_rec("ABA")]).trials) == 3
    ds = standardize([_rec("A" * 17)])
    assert len(ds.trials) == 1 and len(ds.trials[0]) == 17


def test_standardize_is_idempotent(small_dataset):
    assert standardize(small_dataset) == small_dataset


def test_standardize_rejects_unlabeled_steps():
    with pytest.raises(DatasetFormatError, match="unlabeled"):
        standardize([_rec(["A", "", "A"])])


def test_is_unbalanced():
    assert is_unbalanced({"A": 100, "B": 25})
    assert not is_unbalanced({"A": 100, "B": 26})
    assert not is_unbalanced({"A": 100, "B": 99})
    assert not is_unbalanced({"A": 50})


def test_is_unbalanced_on_dataset(small_dataset):
    assert not is_unbalanced(small_dataset)


def test_synthetic_counts_and_determinism():
    spec = SyntheticSpec(n_subjects=2, n_activities=2, trials_per_pair=1, trial_len_steps=200)
    a = generate_synthetic(spec, 1)
    assert len(a.trials) == 4
    b = generate_synthetic(spec, 1)
    assert a == b
    assert all(np.array_equal(x.data, y.data) for x, y in zip(a.trials, b.trials))
    assert generate_synthetic(spec, 2) != a


def test_standard_fixture_shape():
    ds = generate_synthetic(STANDARD_FIXTURE, 42)
    assert len(ds.trials) == 6 * 4 * 4
    assert all(len(t) == 3000 and t.data.shape[1] == 3 for t in ds.trials)


def _lag1(x):
    x = x - x.mean()
    return float((x[1:] * x[:-1]).sum() / (x * x).sum())


def test_drift_autocorrelation_tracks_trial_noise_corr():
    rng = np.random.default_rng(0)
    assert _lag1(ar1_drift(10_000, 0.95, 1.0, rng)) > 0.8
    assert abs(_lag1(ar1_drift(10_000, 0.0, 1.0, rng))) < 0.2


def test_ar1_drift_is_stationary():
    x = ar1_drift(200_000, 0.9, 2.0, np.random.default_rng(1))
    assert x.std() == pytest.approx(2.0, rel=0.05)


def test_synthetic_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(trial_noise_corr=1.0)
    with pytest.raises(ValueError):
        SyntheticSpec(n_subjects=0)


def test_channel_meta_kind():
    with pytest.raises(ValueError):
        ChannelMeta("x", "barometer", "wrist")
    names = [c.name for c in default_channels(7)]
    assert names[:4] == ["acc_x", "acc_y", "acc_z", "gyro_x"]
