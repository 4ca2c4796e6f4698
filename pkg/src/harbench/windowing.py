"""Temporal sliding windows with provenance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, Trial

SNOW_OVERLAP = 0.5
FNOW_OVERLAP = 0.0


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class WindowConfig:
    window_sec: float = 5.0
    overlap_frac: float = SNOW_OVERLAP

    def __post_init__(self):
        if not self.window_sec > 0:
            raise ValueError("window_sec must be positive")
        if not 0.0 <= self.overlap_frac < 1.0:
            raise ValueError("overlap_frac must lie in [0, 1)")

    def window_len(self, sample_rate_hz: float) -> int:
        n = round_half_up(self.window_sec * sample_rate_hz)
        if n < 1:
            raise ValueError(f"window of {self.window_sec}s at {sample_rate_hz} Hz has no samples")
        return n

    def step(self, sample_rate_hz: float) -> int:
        return max(1, round_half_up(self.window_len(sample_rate_hz) * (1.0 - self.overlap_frac)))

    def with_overlap(self, overlap_frac: float) -> "WindowConfig":
        return WindowConfig(self.window_sec, overlap_frac)


@dataclass(frozen=True, eq=False)
class Window:
    """Half-open slice ``[start_idx, end_idx)`` of one trial."""

    trial_id: str
    subject_id: str
    activity_label: str
    start_idx: int
    end_idx: int
    data: np.ndarray

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.trial_id, self.start_idx, self.end_idx)

    def __len__(self) -> int:
        return self.end_idx - self.start_idx


def window_count(trial_len: int, window_len: int, step: int) -> int:
    if window_len < 1 or step < 1:
        raise ValueError("window_len and step must be >= 1")
    if trial_len < window_len:
        return 0
    return (trial_len - window_len) // step + 1


def window_starts(trial_len: int, window_len: int, step: int) -> range:
    """Start indices of every full window; the residual tail is dropped."""
    if window_len < 1 or step < 1:
        raise ValueError("window_len and step must be >= 1")
    return range(0, trial_len - window_len + 1, step)


def slide_windows(trial: Trial, config: WindowConfig) -> list[Window]:
    wlen = config.window_len(trial.sample_rate_hz)
    step = config.step(trial.sample_rate_hz)
    return _slide(trial, wlen, step)


def _slide(trial: Trial, wlen: int, step: int) -> list[Window]:
    return [
        Window(trial.trial_id, trial.subject_id, trial.activity_label, s, s + wlen, trial.data[s : s + wlen])
        for s in window_starts(len(trial), wlen, step)
    ]


def dataset_windows(dataset: Dataset, config: WindowConfig) -> list[Window]:
    """All windows of a dataset, ordered by (trial_id, start_idx)."""
    out = []
    for t in dataset.trials:
        out.extend(slide_windows(t, config))
    return out


def stack(windows: list[Window]) -> np.ndarray:
    """Window data as an ``(N, T, C)`` array."""
    return np.stack([w.data for w in windows]) if windows else np.empty((0, 0, 0))
