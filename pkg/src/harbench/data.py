"""Dataset containers, canonical on-disk format and the synthetic generator."""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels

SENSOR_KINDS = ("accelerometer", "gyroscope", "magnetometer", "temperature", "other")
FORMAT_NAME = "harbench-canonical"
FORMAT_VERSION = 1
UNBALANCED_RATIO = 4.0


class DatasetFormatError(ValueError):
    """Raised when a dataset (in memory or on disk) violates the schema."""


def _frozen_array(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ChannelMeta:
    name: str
    sensor_kind: str = "other"
    body_position: str = ""

    def __post_init__(self):
        if self.sensor_kind not in SENSOR_KINDS:
            raise DatasetFormatError(f"unknown sensor kind {self.sensor_kind!r}")

    def to_dict(self) -> dict:
        return {"name": self.name, "sensor_kind": self.sensor_kind, "body_position": self.body_position}


@dataclass(frozen=True, eq=False)
class Trial:
    """A single-activity recording by one subject; rows are time steps."""

    trial_id: str
    subject_id: str
    activity_label: str
    sample_rate_hz: float
    channels: tuple[ChannelMeta, ...]
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "data", _frozen_array(self.data))
        if self.data.ndim != 2:
            raise DatasetFormatError(f"trial {self.trial_id}: data must be 2-D")
        if self.data.shape[0] < 1:
            raise DatasetFormatError(f"trial {self.trial_id}: no samples")
        if self.data.shape[1] != len(self.channels):
            raise DatasetFormatError(
                f"trial {self.trial_id}: {self.data.shape[1]} data columns but "
                f"{len(self.channels)} declared channels"
            )
        names = [c.name for c in self.channels]
        if len(set(names)) != len(names):
            raise DatasetFormatError(f"trial {self.trial_id}: duplicate channel names")
        if not self.sample_rate_hz > 0:
            raise DatasetFormatError(f"trial {self.trial_id}: sample rate must be positive")
        if not np.isfinite(self.data).all():
            raise DatasetFormatError(f"trial {self.trial_id}: non-finite sample")

    def __len__(self) -> int:
        return self.data.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Trial):
            return NotImplemented
        return (
            self.trial_id == other.trial_id
            and self.subject_id == other.subject_id
            and self.activity_label == other.activity_label
            and self.sample_rate_hz == other.sample_rate_hz
            and self.channels == other.channels
            and np.array_equal(self.data, other.data)
        )

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    trials: tuple[Trial, ...]
    activity_set: frozenset = field(default=None)
    subject_set: frozenset = field(default=None)

    def __post_init__(self):
        trials = tuple(sorted(self.trials, key=lambda t: t.trial_id))
        object.__setattr__(self, "trials", trials)
        if self.activity_set is None:
            object.__setattr__(self, "activity_set", frozenset(t.activity_label for t in trials))
        else:
            object.__setattr__(self, "activity_set", frozenset(self.activity_set))
        if self.subject_set is None:
            object.__setattr__(self, "subject_set", frozenset(t.subject_id for t in trials))
        else:
            object.__setattr__(self, "subject_set", frozenset(self.subject_set))
        ids = [t.trial_id for t in trials]
        if len(set(ids)) != len(ids):
            raise DatasetFormatError("duplicate trial ids")
        for t in trials:
            if t.activity_label not in self.activity_set:
                raise DatasetFormatError(f"trial {t.trial_id}: label {t.activity_label!r} not in activity set")
            if t.subject_id not in self.subject_set:
                raise DatasetFormatError(f"trial {t.trial_id}: subject {t.subject_id!r} not in subject set")
        if trials:
            ref = trials[0]
            for t in trials[1:]:
                if t.channels != ref.channels:
                    raise DatasetFormatError(f"trial {t.trial_id}: channel schema differs")
                if t.sample_rate_hz != ref.sample_rate_hz:
                    raise DatasetFormatError(
                        f"trial {t.trial_id}: sample rate {t.sample_rate_hz} differs from {ref.sample_rate_hz}"
                    )

    @property
    def channels(self) -> tuple[ChannelMeta, ...]:
        return self.trials[0].channels if self.trials else ()

    @property
    def sample_rate_hz(self) -> float:
        return self.trials[0].sample_rate_hz if self.trials else float("nan")

    @property
    def activities(self) -> list[str]:
        return sorted(self.activity_set)

    @property
    def subjects(self) -> list[str]:
        return sorted(self.subject_set)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.name == other.name
            and self.activity_set == other.activity_set
            and self.subject_set == other.subject_set
            and self.trials == other.trials
        )

    __hash__ = object.__hash__


# ---------------------------------------------------------------------------
# standardization of continuous recordings
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Recording:
    """A continuous recording with one activity label per time step."""

    recording_id: str
    subject_id: str
    sample_rate_hz: float
    channels: tuple[ChannelMeta, ...]
    data: np.ndarray
    labels: tuple

    @classmethod
    def from_trial(cls, trial: Trial) -> "Recording":
        return cls(
            trial.trial_id,
            trial.subject_id,
            trial.sample_rate_hz,
            trial.channels,
            trial.data,
            (trial.activity_label,) * len(trial),
        )


def standardize(raw: Iterable[Recording] | Dataset, name: str = "standardized") -> Dataset:
    """Split recordings at every label change; each constant-label run is a trial.

    Single-segment recordings keep their id, so re-standardizing a
    standardized dataset returns it unchanged.
    """
    if isinstance(raw, Dataset):
        name = raw.name
        raw = [Recording.from_trial(t) for t in raw.trials]
    trials = []
    for rec in raw:
        data = np.asarray(rec.data, dtype=np.float64)
        labels = list(rec.labels)
        if data.ndim != 2 or data.shape[0] == 0:
            raise DatasetFormatError(f"recording {rec.recording_id}: empty recording")
        if len(labels) != data.shape[0]:
            raise DatasetFormatError(
                f"recording {rec.recording_id}: {len(labels)} labels for {data.shape[0]} steps"
            )
        for i, lab in enumerate(labels):
            if lab is None or (isinstance(lab, float) and math.isnan(lab)) or str(lab).strip() == "":
                raise DatasetFormatError(f"recording {rec.recording_id}: unlabeled step {i}")
        bounds = [0] + [i for i in range(1, len(labels)) if labels[i] != labels[i - 1]] + [len(labels)]
        n_seg = len(bounds) - 1
        for s in range(n_seg):
            a, b = bounds[s], bounds[s + 1]
            tid = rec.recording_id if n_seg == 1 else f"{rec.recording_id}#{s:04d}"
            trials.append(
                Trial(tid, rec.subject_id, str(labels[a]), rec.sample_rate_hz, rec.channels, data[a:b])
            )
    return Dataset(name, tuple(trials))


# ---------------------------------------------------------------------------
# class balance
# ---------------------------------------------------------------------------


def is_unbalanced(counts: Mapping | Dataset, config=None) -> bool:
    """True iff the largest class has at least four times the smallest.

    ``counts`` is either a label->count mapping or a Dataset, in which case
    window counts under ``config`` (a WindowConfig, default 5 s / 50%) are used.
    """
    if isinstance(counts, Dataset):
        from .windowing import WindowConfig, slide_windows

        config = config or WindowConfig()
        c = Counter()
        for t in counts.trials:
            c[t.activity_label] += len(slide_windows(t, config))
        counts = c
    values = [v for v in counts.values()]
    if not values:
        raise ValueError("empty class counts")
    if len(values) == 1:
        return False
    lo, hi = min(values), max(values)
    if lo == 0:
        return True
    return hi >= UNBALANCED_RATIO * lo


# ---------------------------------------------------------------------------
# canonical on-disk format
# ---------------------------------------------------------------------------


def _read_table(path: Path, expect_label: bool):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError as exc:
        raise DatasetFormatError(f"missing trial file {path}") from exc
    if not rows:
        raise DatasetFormatError(f"{path}: empty file")
    header, body = [h.strip() for h in rows[0]], rows[1:]
    labels = None
    if expect_label:
        if "label" not in header:
            raise DatasetFormatError(f"{path}: continuous recording lacks a 'label' column")
        li = header.index("label")
        labels = [r[li].strip() if li < len(r) else "" for r in body]
        header = header[:li] + header[li + 1 :]
        body = [r[:li] + r[li + 1 :] for r in body]
    values = np.empty((len(body), len(header)))
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise DatasetFormatError(f"{path}: row {i + 1} has {len(r)} columns, header has {len(header)}")
        for j, cell in enumerate(r):
            try:
                values[i, j] = float(cell)
            except ValueError as exc:
                raise DatasetFormatError(f"{path}: non-numeric sample {cell!r} at row {i + 1}") from exc
    return header, values, labels


def _parse_channels(meta) -> tuple[ChannelMeta, ...]:
    try:
        return tuple(ChannelMeta(c["name"], c.get("sensor_kind", "other"), c.get("body_position", "")) for c in meta)
    except (KeyError, TypeError) as exc:
        raise DatasetFormatError(f"bad channel schema: {exc}") from exc


def ingest_dataset(path, format_tag: str = "auto") -> Dataset:
    """Load a dataset directory in the canonical layout.

    ``format_tag`` is ``"canonical"`` (pre-segmented trials), ``"continuous"``
    (recordings with a per-step ``label`` column, routed through
    :func:`standardize`) or ``"auto"`` to follow ``dataset.json``.
    """
    root = Path(path)
    meta_path = root / "dataset.json"
    if not meta_path.is_file():
        raise DatasetFormatError(f"missing metadata file {meta_path}")
    with open(meta_path) as fh:
        meta = json.load(fh)
    layout = meta.get("layout", "trials")
    if format_tag == "auto":
        format_tag = "continuous" if layout == "continuous" else "canonical"
    if format_tag not in ("canonical", "continuous"):
        raise DatasetFormatError(f"unknown format tag {format_tag!r}")
    channels = _parse_channels(meta.get("channels", []))
    names = [c.name for c in channels]
    rate = float(meta["sample_rate_hz"])
    per_trial_rates = set()
    if format_tag == "canonical":
        entries = meta.get("trials")
        if entries is None:
            raise DatasetFormatError("dataset.json has no trial index")
        trials = []
        for e in entries:
            per_trial_rates.add(float(e.get("sample_rate_hz", rate)))
            header, values, _ = _read_table(root / e.get("file", f"trials/{e['trial_id']}.csv"), False)
            if len(header) != len(channels):
                raise DatasetFormatError(
                    f"trial {e['trial_id']}: {len(header)} data columns but {len(channels)} declared channels"
                )
            if header != names:
                raise DatasetFormatError(f"trial {e['trial_id']}: header {header} does not match channels")
            trials.append(Trial(str(e["trial_id"]), str(e["subject_id"]), str(e["activity_label"]), rate, channels, values))
        if len(per_trial_rates - {rate}) > 0:
            raise DatasetFormatError(f"inconsistent sample rates {sorted(per_trial_rates | {rate})}")
        return Dataset(
            meta.get("name", root.name),
            tuple(trials),
            frozenset(meta.get("activities", [t.activity_label for t in trials])),
            frozenset(meta.get("subjects", [t.subject_id for t in trials])),
        )
    recs = []
    for e in meta.get("recordings", []):
        per_trial_rates.add(float(e.get("sample_rate_hz", rate)))
        header, values, labels = _read_table(root / e.get("file", f"recordings/{e['recording_id']}.csv"), True)
        if len(header) != len(channels):
            raise DatasetFormatError(
                f"recording {e['recording_id']}: {len(header)} data columns but {len(channels)} declared channels"
            )
        recs.append(Recording(str(e["recording_id"]), str(e["subject_id"]), rate, channels, values, tuple(labels)))
    if len(per_trial_rates - {rate}) > 0:
        raise DatasetFormatError(f"inconsistent sample rates {sorted(per_trial_rates | {rate})}")
    ds = standardize(recs, name=meta.get("name", root.name))
    if "activities" in meta or "subjects" in meta:
        ds = Dataset(
            ds.name,
            ds.trials,
            frozenset(meta.get("activities", ds.activity_set)),
            frozenset(meta.get("subjects", ds.subject_set)),
        )
    return ds


def emit_dataset(dataset: Dataset, path) -> Path:
    """Write ``dataset`` in the canonical layout; floats use 17 significant digits."""
    root = Path(path)
    (root / "trials").mkdir(parents=True, exist_ok=True)
    index = []
    for t in dataset.trials:
        rel = f"trials/{t.trial_id}.csv"
        with open(root / rel, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([c.name for c in t.channels])
            for row in t.data:
                w.writerow([repr(float(v)) for v in row])
        index.append(
            {"trial_id": t.trial_id, "subject_id": t.subject_id, "activity_label": t.activity_label, "file": rel}
        )
    meta = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "layout": "trials",
        "name": dataset.name,
        "sample_rate_hz": dataset.sample_rate_hz,
        "channels": [c.to_dict() for c in dataset.channels],
        "activities": dataset.activities,
        "subjects": dataset.subjects,
        "trials": index,
    }
    with open(root / "dataset.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    return root


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------

_AXES = ("x", "y", "z")
_KIND_PREFIX = (("accelerometer", "acc"), ("gyroscope", "gyro"), ("magnetometer", "mag"))


def default_channels(n_channels: int) -> tuple[ChannelMeta, ...]:
    """Tri-axial sensors in acc, gyro, mag order; extras are 'other'."""
    out = []
    for i in range(n_channels):
        g = i // 3
        if g < len(_KIND_PREFIX):
            kind, prefix = _KIND_PREFIX[g]
            out.append(ChannelMeta(f"{prefix}_{_AXES[i % 3]}", kind, "wrist"))
        else:
            out.append(ChannelMeta(f"ch{i:02d}", "other", "wrist"))
    return tuple(out)


@dataclass(frozen=True)
class SyntheticSpec:
    n_subjects: int = 6
    n_activities: int = 4
    trials_per_pair: int = 4
    trial_len_steps: int = 3000
    sample_rate_hz: float = 50.0
    n_channels: int = 3
    trial_noise_corr: float = 0.9
    noise_sd: float = 0.5
    drift_sd: float = 0.8
    subject_sd: float = 0.15
    activity_sep: float = 1.0

    def __post_init__(self):
        for name in ("n_subjects", "n_activities", "trials_per_pair", "trial_len_steps", "n_channels"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        if not 0.0 <= self.trial_noise_corr < 1.0:
            raise ValueError("trial_noise_corr must lie in [0, 1)")
        for name in ("noise_sd", "drift_sd", "subject_sd", "activity_sep"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


STANDARD_FIXTURE = SyntheticSpec()


def ar1_drift(n: int, phi: float, sd: float, rng: np.random.Generator) -> np.ndarray:
    """Stationary AR(1) path with marginal standard deviation ``sd``."""
    innov = rng.normal(0.0, sd * math.sqrt(1.0 - phi * phi), size=n)
    y0 = rng.normal(0.0, sd)
    return kernels.ar1(innov, float(phi), float(y0))


def generate_synthetic(spec: SyntheticSpec, seed: int) -> Dataset:
    """One trial per (subject, activity, repetition).

    Channel signal = subject gain * (activity offset + two-tone sinusoid keyed
    to the activity) + per-trial drift + white noise. The drift is a per-trial
    level plus an AR(1) wander with coefficient ``trial_noise_corr``, so
    windows cut from one trial share information that windows from other
    trials do not.
    """
    rng = np.random.default_rng(seed)
    A, C = spec.n_activities, spec.n_channels
    fs = spec.sample_rate_hz
    nyq = fs / 2.0
    # activity signatures
    offsets = rng.normal(0.0, spec.activity_sep, size=(A, C))
    freqs = rng.uniform(0.5, min(4.0, 0.4 * nyq), size=(A, 2))
    amps = rng.uniform(0.5, 1.5, size=(A, C, 2))
    gains = 1.0 + rng.normal(0.0, spec.subject_sd, size=(spec.n_subjects, C))
    channels = default_channels(C)
    t = np.arange(spec.trial_len_steps) / fs
    trials = []
    for s in range(spec.n_subjects):
        for a in range(A):
            for r in range(spec.trials_per_pair):
                phase = rng.uniform(0.0, 2 * math.pi, size=2)
                tones = np.sin(2 * math.pi * freqs[a][None, :] * t[:, None] + phase[None, :])  # T,2
                clean = offsets[a][None, :] + tones @ amps[a].T  # T,C
                x = gains[s][None, :] * clean
                level = rng.normal(0.0, spec.drift_sd, size=C)
                for c in range(C):
                    x[:, c] += level[c] + ar1_drift(spec.trial_len_steps, spec.trial_noise_corr, spec.drift_sd, rng)
                x += rng.normal(0.0, spec.noise_sd, size=x.shape)
                trials.append(
                    Trial(f"s{s:02d}_a{a:02d}_r{r:02d}", f"subj{s:02d}", f"act{a:02d}", fs, channels, x)
                )
    return Dataset(f"synthetic-seed{seed}", tuple(trials))
