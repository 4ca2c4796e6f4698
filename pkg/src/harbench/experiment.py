"""Experiment orchestration: one fold plan per batch, every method on the same splits."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .data import Dataset, SyntheticSpec, generate_synthetic, ingest_dataset
from .evaluation import FoldResult, ResultSummary, heldout_separability, lda_project
from .features import batch_mean_corr, batch_mean_std
from .learners import predict, train_bagging, train_mlp, train_voting
from .neuralnet import (
    ShapeError,
    TrainConfig,
    assemble_modalities,
    batch_signal_image,
    build_chen_xue,
    build_ha2015,
    build_ha2016,
    build_jiang_yin,
    fit,
    modality_groups,
)
from .splitplan import COMBINATIONS, FoldPlan, audit_leakage, build_plans
from .windowing import WindowConfig, stack

METHODS_ORDER = ("kwapisz", "catal", "kim", "chen_xue", "jiang_yin", "ha2015", "ha2016")
INFEASIBLE = "−"


class Infeasible(Exception):
    """The method's structural preconditions fail on this dataset."""


@dataclass(frozen=True)
class FoldContext:
    class_list: tuple
    channels: tuple
    window_len: int
    seed: int
    train_config: TrainConfig


# ---------------------------------------------------------------------------
# methods
# ---------------------------------------------------------------------------


class Method:
    name = ""

    def check(self, dataset: Dataset, window_len: int) -> None:
        """Raise :class:`Infeasible` if the method cannot run on this dataset."""

    def fit_predict(self, train, test, ctx: FoldContext) -> list:
        raise NotImplementedError


class FeatureMethod(Method):
    extractor = staticmethod(batch_mean_std)

    def features(self, windows):
        return self.extractor(stack(windows))

    def fit_predict(self, train, test, ctx):
        model = self.train(self.features(train), [w.activity_label for w in train], ctx)
        return predict(model, self.features(test))[0]


class Kwapisz(FeatureMethod):
    name = "kwapisz"

    def train(self, X, y, ctx):
        return train_mlp(X, y, opt_cfg=replace(ctx.train_config, seed=ctx.seed))


class Catal(FeatureMethod):
    name = "catal"

    def train(self, X, y, ctx):
        return train_voting(X, y, opt_cfg=replace(ctx.train_config, seed=ctx.seed))


class Kim(FeatureMethod):
    name = "kim"
    extractor = staticmethod(batch_mean_corr)

    def check(self, dataset, window_len):
        if len(dataset.channels) < 2:
            raise Infeasible("correlation features need at least two channels")

    def train(self, X, y, ctx):
        return train_bagging(X, y, n_trees=10, seed=ctx.seed)


class ConvMethod(Method):
    """Shared fold loop for the networks: z-score with train statistics, fit, predict."""

    def spec(self, dataset_channels, window_len, n_classes):
        raise NotImplementedError

    def inputs(self, stacked, channels):
        return stacked

    def check(self, dataset, window_len):
        try:
            self.spec(dataset.channels, window_len, max(2, len(dataset.activity_set)))
        except (ShapeError, ValueError) as exc:
            raise Infeasible(str(exc)) from exc

    def fit_predict(self, train, test, ctx):
        xtr = stack(train)
        mean = xtr.mean(axis=(0, 1))
        std = xtr.std(axis=(0, 1))
        std = np.where(std > 0, std, 1.0)
        xtr = self.inputs((xtr - mean) / std, ctx.channels)
        xte = self.inputs((stack(test) - mean) / std, ctx.channels)
        spec = self.spec(ctx.channels, ctx.window_len, len(ctx.class_list))
        net = fit(spec, xtr, [w.activity_label for w in train], replace(ctx.train_config, seed=ctx.seed), ctx.class_list)
        return net.predict(xte)[0]


class ChenXue(ConvMethod):
    name = "chen_xue"

    def spec(self, channels, window_len, n_classes):
        return build_chen_xue((window_len, len(channels)), n_classes)


class JiangYin(ConvMethod):
    name = "jiang_yin"

    def spec(self, channels, window_len, n_classes):
        return build_jiang_yin((window_len, len(channels)), n_classes)

    def inputs(self, stacked, channels):
        return batch_signal_image(stacked)


class Ha(ConvMethod):
    def __init__(self, name, builder):
        self.name = name
        self.builder = builder

    def spec(self, channels, window_len, n_classes):
        return self.builder((window_len, len(channels)), modality_groups(channels), n_classes)

    def inputs(self, stacked, channels):
        return assemble_modalities(stacked, modality_groups(channels))


METHODS: dict[str, Method] = {
    "kwapisz": Kwapisz(),
    "catal": Catal(),
    "kim": Kim(),
    "chen_xue": ChenXue(),
    "jiang_yin": JiangYin(),
    "ha2015": Ha("ha2015", build_ha2015),
    "ha2016": Ha("ha2016", build_ha2016),
}


# ---------------------------------------------------------------------------
# configuration and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    method: str
    combination: str
    dataset_path: str | None = None
    synthetic: SyntheticSpec | None = None
    window_sec: float = 5.0
    k: int = 10
    seed: int = 0
    train_config: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {sorted(METHODS)}")
        if self.combination not in COMBINATIONS:
            raise ValueError(f"unknown combination {self.combination!r}; expected one of {COMBINATIONS}")
        if self.dataset_path is None and self.synthetic is None:
            object.__setattr__(self, "synthetic", SyntheticSpec())

    def config_hash(self) -> str:
        doc = {
            "version": __version__,
            "method": self.method,
            "combination": self.combination,
            "dataset": self.dataset_path or asdict(self.synthetic),
            "window": asdict(WindowConfig(self.window_sec)),
            "k": self.k,
            "seed": self.seed,
            "train": asdict(self.train_config),
        }
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]

    def load_dataset(self) -> Dataset:
        if self.dataset_path is not None:
            return ingest_dataset(self.dataset_path)
        return generate_synthetic(self.synthetic, self.seed)


@dataclass
class ResultRow:
    method: str
    dataset: str
    combination: str
    status: str = "ok"
    mean_accuracy: float = float("nan")
    ci_low: float = float("nan")
    ci_high: float = float("nan")
    mean_macro_f: float = float("nan")
    fold_accuracies: list = field(default_factory=list)
    fold_macro_f: list = field(default_factory=list)
    leakage: dict = field(default_factory=dict)
    wall_time: float = 0.0
    config_hash: str = ""
    plan_fingerprint: str = ""
    reason: str = ""

    @property
    def feasible(self) -> bool:
        return self.status == "ok"

    def comparable(self) -> dict:
        """Everything except wall time; equal for reruns of one config."""
        d = asdict(self)
        d.pop("wall_time")
        return d


def _fold_seed(seed, rep, fold):
    return int(np.random.SeedSequence([seed, rep, fold]).generate_state(1)[0])


def evaluate_plans(method: Method, dataset: Dataset, plans: list[FoldPlan], seed: int, train_config: TrainConfig):
    """Per-plan lists of FoldResults."""
    class_list = tuple(dataset.activities)
    window_len = plans[0].window_config.window_len(dataset.sample_rate_hz)
    out = []
    for rep, plan in enumerate(plans):
        folds = []
        for i, f in enumerate(plan.folds):
            ctx = FoldContext(class_list, dataset.channels, window_len, _fold_seed(seed, rep, i), train_config)
            pred = method.fit_predict(f.train, f.test, ctx)
            folds.append(FoldResult.from_predictions(i, pred, [w.activity_label for w in f.test], class_list))
        out.append(folds)
    return out


def summarize(per_plan, combination: str) -> ResultSummary:
    """Fold-level statistics, or repetition means for SNLSx10."""
    if combination == "SNLSx10":
        acc = [np.mean([r.accuracy for r in folds]) for folds in per_plan]
        mf = [np.mean([r.macro_f for r in folds]) for folds in per_plan]
        flat = tuple(r for folds in per_plan for r in folds)
        return ResultSummary.from_values(acc, mf, flat)
    folds = per_plan[0]
    return ResultSummary.from_values([r.accuracy for r in folds], [r.macro_f for r in folds], tuple(folds))


def _combined_leakage(plans):
    reports = [audit_leakage(p) for p in plans]
    if len(reports) == 1:
        return reports[0].to_dict()
    return {
        "combination": reports[0].combination_tag,
        "repetitions": len(reports),
        "overlap_pairs": sum(r.overlap_pairs for r in reports),
        "same_trial_pairs": sum(r.same_trial_pairs for r in reports),
        "same_subject_pairs": sum(r.same_subject_pairs for r in reports),
    }


def _plans_fingerprint(plans) -> str:
    h = hashlib.sha256()
    for p in plans:
        h.update(p.fingerprint().encode())
    return h.hexdigest()[:16]


def run_batch(
    dataset: Dataset,
    methods,
    combination: str,
    k: int = 10,
    seed: int = 0,
    window_sec: float = 5.0,
    train_config: TrainConfig | None = None,
    config_hashes: dict | None = None,
) -> list[ResultRow]:
    """Build the fold plan(s) once and evaluate every method on them."""
    train_config = train_config or TrainConfig()
    wcfg = WindowConfig(window_sec)
    window_len = wcfg.window_len(dataset.sample_rate_hz)
    plans = build_plans(dataset, combination, k, wcfg, seed)
    leakage = _combined_leakage(plans)
    fp = _plans_fingerprint(plans)
    rows = []
    for name in methods:
        method = METHODS[name] if isinstance(name, str) else name
        row = ResultRow(method.name, dataset.name, combination, leakage=dict(leakage), plan_fingerprint=fp)
        if config_hashes:
            row.config_hash = config_hashes.get(method.name, "")
        t0 = time.perf_counter()
        try:
            method.check(dataset, window_len)
        except Infeasible as exc:
            row.status, row.reason = "infeasible", str(exc)
            rows.append(row)
            continue
        per_plan = evaluate_plans(method, dataset, plans, seed, train_config)
        s = summarize(per_plan, combination)
        row.mean_accuracy, row.ci_low, row.ci_high, row.mean_macro_f = s.mean_accuracy, s.ci_low, s.ci_high, s.mean_macro_f
        row.fold_accuracies = [r.accuracy for folds in per_plan for r in folds]
        row.fold_macro_f = [r.macro_f for folds in per_plan for r in folds]
        row.wall_time = time.perf_counter() - t0
        rows.append(row)
    return rows


def run_experiment(config: ExperimentConfig, dataset: Dataset | None = None) -> ResultRow:
    dataset = dataset if dataset is not None else config.load_dataset()
    return run_batch(
        dataset,
        [config.method],
        config.combination,
        config.k,
        config.seed,
        config.window_sec,
        config.train_config,
        {config.method: config.config_hash()},
    )[0]


# ---------------------------------------------------------------------------
# LDA on handcrafted features
# ---------------------------------------------------------------------------


def lda_fold(dataset: Dataset, combination: str, fold: int = 0, k: int = 10, seed: int = 0, window_sec: float = 5.0):
    """Fit LDA on a fold's train features (mean/std) and project both sides.

    Returns ``(projection, train_points, train_labels, test_points, test_labels)``.
    """
    plan = build_plans(dataset, combination, k, WindowConfig(window_sec), seed)[0]
    f = plan.folds[fold]
    Xtr = batch_mean_std(stack(list(f.train)))
    Xte = batch_mean_std(stack(list(f.test)))
    ytr = [w.activity_label for w in f.train]
    yte = [w.activity_label for w in f.test]
    proj = lda_project(Xtr, ytr, 2)
    return proj, proj.points, ytr, proj.transform(Xte), yte


def heldout_lda_separability(
    dataset: Dataset, combination: str, k: int = 10, seed: int = 0, window_sec: float = 5.0
) -> float:
    """Fold-averaged component-1 separability of held-out windows in the
    discriminant space fitted on that fold's training windows."""
    plan = build_plans(dataset, combination, k, WindowConfig(window_sec), seed)[0]
    ratios = []
    for f in plan.folds:
        Xtr = batch_mean_std(stack(list(f.train)))
        Xte = batch_mean_std(stack(list(f.test)))
        ytr = [w.activity_label for w in f.train]
        proj = lda_project(Xtr, ytr, 1)
        ratios.append(heldout_separability(proj.points[:, 0], ytr, proj.transform(Xte)[:, 0], [w.activity_label for w in f.test]))
    return float(np.mean(ratios))
