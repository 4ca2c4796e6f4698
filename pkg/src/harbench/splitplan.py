"""Train/test fold plans for each generation-process x protocol combination.

Combination tags:

* ``SNCV``  - 50% overlapping windows, k-fold CV over windows
* ``FNCV``  - non-overlapping windows, k-fold CV over windows
* ``LTCV``  - k-fold CV over trials, then 50% overlapping windows per trial
* ``SNLS``  - 50% overlapping windows, one fold per subject
* ``SNLSx10`` - ten SNLS repetitions, each training on 80% of the train windows
* ``HOLDOUT`` - single stratified train/test split of windows
"""

from __future__ import annotations

import hashlib
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .data import Dataset
from .windowing import FNOW_OVERLAP, SNOW_OVERLAP, Window, WindowConfig, dataset_windows, round_half_up, slide_windows

COMBINATIONS = ("SNCV", "FNCV", "LTCV", "SNLS", "SNLSx10", "HOLDOUT")
SNLS_REPEATS = 10
SNLS_SUBSAMPLE = 0.8


class PlanError(ValueError):
    """The dataset cannot support the requested plan."""


@dataclass(frozen=True)
class Fold:
    train: tuple[Window, ...]
    test: tuple[Window, ...]


@dataclass(frozen=True)
class FoldPlan:
    combination_tag: str
    folds: tuple[Fold, ...]
    seed: int | None
    dataset_name: str = ""
    window_config: WindowConfig = field(default_factory=WindowConfig)
    repetition: int | None = None

    def fingerprint(self) -> str:
        """Hash of fold memberships; equal plans give equal fingerprints."""
        h = hashlib.sha256()
        h.update(f"{self.combination_tag}|{self.dataset_name}".encode())
        for i, f in enumerate(self.folds):
            for side, ws in (("train", f.train), ("test", f.test)):
                h.update(f"|{i}:{side}:".encode())
                for w in sorted(ws, key=lambda w: w.key):
                    h.update(f"{w.trial_id},{w.start_idx},{w.end_idx};".encode())
        return h.hexdigest()

    def check(self) -> None:
        """Raise AssertionError if a structural invariant is broken."""
        seen_test = set()
        for i, f in enumerate(self.folds):
            tr = {id(w) for w in f.train}
            te = {id(w) for w in f.test}
            assert not (tr & te), f"fold {i}: window object in both train and test"
            keys_tr = {w.key for w in f.train}
            assert not any(w.key in keys_tr for w in f.test), f"fold {i}: same window in train and test"
            if self.combination_tag in ("SNCV", "FNCV", "LTCV", "SNLS"):
                for w in f.test:
                    assert w.key not in seen_test, f"window {w.key} tested in more than one fold"
                    seen_test.add(w.key)


def _stratified_assign(labels: list, k: int, rng: np.random.Generator) -> np.ndarray:
    """Fold id per item; within a class, items are shuffled and dealt round-robin.

    The dealing position carries over from one class to the next so total
    fold sizes differ by at most one.
    """
    by_class = defaultdict(list)
    for i, lab in enumerate(labels):
        by_class[lab].append(i)
    fold_of = np.empty(len(labels), dtype=np.int64)
    pos = 0
    for lab in sorted(by_class):
        idx = np.asarray(by_class[lab])
        idx = idx[rng.permutation(len(idx))]
        for i in idx:
            fold_of[i] = pos % k
            pos += 1
    return fold_of


def _cv_over_windows(dataset, k, config, seed, tag) -> FoldPlan:
    if k < 2:
        raise PlanError("k must be at least 2")
    windows = dataset_windows(dataset, config)  # sorted by (trial_id, start_idx)
    if len(windows) < k:
        raise PlanError(f"{len(windows)} windows cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    fold_of = _stratified_assign([w.activity_label for w in windows], k, rng)
    return _folds_from_assignment(windows, fold_of, k, tag, seed, dataset.name, config)


def _folds_from_assignment(windows, fold_of, k, tag, seed, name, config) -> FoldPlan:
    folds = []
    for f in range(k):
        test = tuple(w for w, a in zip(windows, fold_of) if a == f)
        train = tuple(w for w, a in zip(windows, fold_of) if a != f)
        folds.append(Fold(train, test))
    return FoldPlan(tag, tuple(folds), seed, name, config)


def split_sncv(dataset: Dataset, k: int = 10, config: WindowConfig | None = None, seed: int = 0) -> FoldPlan:
    config = (config or WindowConfig()).with_overlap(SNOW_OVERLAP)
    return _cv_over_windows(dataset, k, config, seed, "SNCV")


def split_fncv(dataset: Dataset, k: int = 10, config: WindowConfig | None = None, seed: int = 0) -> FoldPlan:
    config = (config or WindowConfig()).with_overlap(FNOW_OVERLAP)
    return _cv_over_windows(dataset, k, config, seed, "FNCV")


def split_ltcv(dataset: Dataset, k: int = 10, config: WindowConfig | None = None, seed: int = 0) -> FoldPlan:
    """Fold the trials, then window each trial; a trial lives in one fold."""
    config = (config or WindowConfig()).with_overlap(SNOW_OVERLAP)
    if k < 2:
        raise PlanError("k must be at least 2")
    trials = dataset.trials
    if len(trials) < k:
        raise PlanError(f"{len(trials)} trials cannot fill {k} folds")
    rng = np.random.default_rng(seed)
    fold_of_trial = _stratified_assign([t.activity_label for t in trials], k, rng)
    windows, fold_of = [], []
    for t, f in zip(trials, fold_of_trial):
        ws = slide_windows(t, config)
        windows.extend(ws)
        fold_of.extend([f] * len(ws))
    return _folds_from_assignment(windows, np.asarray(fold_of, dtype=np.int64), k, "LTCV", seed, dataset.name, config)


def split_snls(dataset: Dataset, config: WindowConfig | None = None) -> FoldPlan:
    """Leave-one-subject-out: fold ``s`` tests every window of subject ``s``."""
    config = (config or WindowConfig()).with_overlap(SNOW_OVERLAP)
    subjects = dataset.subjects
    if len(subjects) < 2:
        raise PlanError("leave-one-subject-out needs at least two subjects")
    windows = dataset_windows(dataset, config)
    folds = []
    for s in subjects:
        test = tuple(w for w in windows if w.subject_id == s)
        if not test:
            raise PlanError(f"subject {s} yields no windows")
        train = tuple(w for w in windows if w.subject_id != s)
        folds.append(Fold(train, test))
    return FoldPlan("SNLS", tuple(folds), None, dataset.name, config)


def split_snls_x10(
    dataset: Dataset, config: WindowConfig | None = None, seed: int = 0, repeats: int = SNLS_REPEATS
) -> list[FoldPlan]:
    base = split_snls(dataset, config)
    plans = []
    for r in range(repeats):
        rng = np.random.default_rng([seed, r])
        folds = []
        for f in base.folds:
            n_keep = round_half_up(SNLS_SUBSAMPLE * len(f.train))
            keep = np.sort(rng.choice(len(f.train), size=n_keep, replace=False))
            folds.append(Fold(tuple(f.train[i] for i in keep), f.test))
        plans.append(FoldPlan("SNLSx10", tuple(folds), seed, dataset.name, base.window_config, repetition=r))
    return plans


def split_holdout(
    dataset: Dataset, config: WindowConfig | None = None, train_frac: float = 0.7, seed: int = 0
) -> FoldPlan:
    if not 0.0 < train_frac < 1.0:
        raise PlanError("train_frac must lie strictly between 0 and 1")
    config = config or WindowConfig()
    windows = dataset_windows(dataset, config)
    return _holdout_windows(windows, train_frac, seed, dataset.name, config)


def _holdout_windows(windows, train_frac, seed, name, config) -> FoldPlan:
    n = len(windows)
    n_train = round_half_up(train_frac * n)
    if n_train == 0 or n_train == n:
        raise PlanError(f"holdout with {n} windows at {train_frac} leaves one side empty")
    rng = np.random.default_rng(seed)
    by_class = defaultdict(list)
    for i, w in enumerate(windows):
        by_class[w.activity_label].append(i)
    labels = sorted(by_class)
    # largest-remainder quotas so per-class shares sum to n_train
    exact = np.array([train_frac * len(by_class[c]) for c in labels])
    quota = np.floor(exact).astype(int)
    rem = n_train - quota.sum()
    order = np.argsort(-(exact - quota), kind="stable")
    quota[order[:rem]] += 1
    is_train = np.zeros(n, dtype=bool)
    for c, q in zip(labels, quota):
        idx = np.asarray(by_class[c])[rng.permutation(len(by_class[c]))]
        is_train[idx[:q]] = True
    train = tuple(w for w, t in zip(windows, is_train) if t)
    test = tuple(w for w, t in zip(windows, is_train) if not t)
    return FoldPlan("HOLDOUT", (Fold(train, test),), seed, name, config)


def build_plans(dataset: Dataset, combination: str, k: int = 10, config=None, seed: int = 0) -> list[FoldPlan]:
    """Plans for a combination tag; only SNLSx10 returns more than one."""
    if combination == "SNCV":
        return [split_sncv(dataset, k, config, seed)]
    if combination == "FNCV":
        return [split_fncv(dataset, k, config, seed)]
    if combination == "LTCV":
        return [split_ltcv(dataset, k, config, seed)]
    if combination == "SNLS":
        return [split_snls(dataset, config)]
    if combination == "SNLSx10":
        return split_snls_x10(dataset, config, seed)
    if combination == "HOLDOUT":
        return [split_holdout(dataset, config, 0.7, seed)]
    raise PlanError(f"unknown combination {combination!r}; expected one of {COMBINATIONS}")


# ---------------------------------------------------------------------------
# leakage audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LeakageReport:
    overlap_pairs: int
    same_trial_pairs: int
    same_subject_pairs: int
    per_fold_overlap: tuple[int, ...]
    per_fold_same_trial: tuple[int, ...]
    per_fold_same_subject: tuple[int, ...]
    combination_tag: str = ""

    def to_dict(self) -> dict:
        """Flat key/value form."""
        out = {
            "combination": self.combination_tag,
            "n_folds": len(self.per_fold_overlap),
            "overlap_pairs": self.overlap_pairs,
            "same_trial_pairs": self.same_trial_pairs,
            "same_subject_pairs": self.same_subject_pairs,
        }
        for i, (o, t, s) in enumerate(zip(self.per_fold_overlap, self.per_fold_same_trial, self.per_fold_same_subject)):
            out[f"fold{i:02d}_overlap_pairs"] = o
            out[f"fold{i:02d}_same_trial_pairs"] = t
            out[f"fold{i:02d}_same_subject_pairs"] = s
        return out


def _encode(windows, trial_codes, subj_codes):
    return (
        np.array([trial_codes[w.trial_id] for w in windows], dtype=np.int64),
        np.array([subj_codes[w.subject_id] for w in windows], dtype=np.int64),
        np.array([w.start_idx for w in windows], dtype=np.int64),
        np.array([w.end_idx for w in windows], dtype=np.int64),
    )


def audit_leakage(plan: FoldPlan) -> LeakageReport:
    """Exact pair counts from a full scan of every (train, test) pair per fold."""
    trial_codes, subj_codes = {}, {}
    for f in plan.folds:
        for w in f.train + f.test:
            trial_codes.setdefault(w.trial_id, len(trial_codes))
            subj_codes.setdefault(w.subject_id, len(subj_codes))
    ov, st, ss = [], [], []
    for f in plan.folds:
        a = _encode(f.train, trial_codes, subj_codes)
        b = _encode(f.test, trial_codes, subj_codes)
        o, t, s = kernels.pair_counts(*a, *b)
        ov.append(int(o))
        st.append(int(t))
        ss.append(int(s))
    return LeakageReport(sum(ov), sum(st), sum(ss), tuple(ov), tuple(st), tuple(ss), plan.combination_tag)
