"""Metrics, Student-t intervals, the unpaired equivalence test and LDA."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, stats

DISPLAY_LEVEL = 0.95
EQUIVALENCE_LEVEL = 0.90
LDA_RIDGE = 1e-6


def _check_pair(pred, true):
    pred, true = list(pred), list(true)
    if len(pred) != len(true):
        raise ValueError(f"{len(pred)} predictions for {len(true)} labels")
    if not pred:
        raise ValueError("no predictions to score")
    return pred, true


def accuracy(pred_labels, true_labels) -> float:
    pred, true = _check_pair(pred_labels, true_labels)
    return sum(p == t for p, t in zip(pred, true)) / len(true)


def confusion_matrix(pred_labels, true_labels, class_list) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    pred, true = _check_pair(pred_labels, true_labels)
    index = {c: i for i, c in enumerate(class_list)}
    cm = np.zeros((len(index), len(index)), dtype=np.int64)
    for p, t in zip(pred, true):
        cm[index[t], index[p]] += 1
    return cm


def f1_from_confusion(cm: np.ndarray) -> np.ndarray:
    """Per-class F1; 0 where precision + recall is 0."""
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    pred_tot = cm.sum(axis=0)
    true_tot = cm.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        prec = np.where(pred_tot > 0, tp / pred_tot, 0.0)
        rec = np.where(true_tot > 0, tp / true_tot, 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)
    return f1


def macro_f_measure(pred, true, class_list) -> float:
    return float(f1_from_confusion(confusion_matrix(pred, true, class_list)).mean())


@dataclass(frozen=True)
class FoldResult:
    fold_id: int
    accuracy: float
    macro_f: float
    confusion: np.ndarray = field(compare=False)

    @classmethod
    def from_predictions(cls, fold_id, pred, true, class_list) -> "FoldResult":
        cm = confusion_matrix(pred, true, class_list)
        return cls(fold_id, float(np.trace(cm) / cm.sum()), float(f1_from_confusion(cm).mean()), cm)


# ---------------------------------------------------------------------------
# intervals and tests
# ---------------------------------------------------------------------------


def t_quantile(p, df):
    return stats.t.ppf(p, df)


def confidence_interval(values, level: float = DISPLAY_LEVEL) -> tuple[float, float]:
    """Student-t interval on the mean with the n-1 sample deviation."""
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    if n < 2:
        raise ValueError("a confidence interval needs at least two values")
    m = v.mean()
    half = t_quantile((1 + level) / 2, n - 1) * v.std(ddof=1) / np.sqrt(n)
    return float(m - half), float(m + half)


@dataclass(frozen=True)
class ResultSummary:
    folds: tuple[FoldResult, ...]
    mean_accuracy: float
    ci_low: float
    ci_high: float
    mean_macro_f: float
    method: str = ""
    dataset: str = ""
    combination: str = ""

    @classmethod
    def from_values(cls, accuracies, macro_fs, folds=(), level=DISPLAY_LEVEL, **tags) -> "ResultSummary":
        acc = np.asarray(accuracies, dtype=np.float64)
        lo, hi = confidence_interval(acc, level) if acc.size >= 2 else (float(acc.mean()), float(acc.mean()))
        return cls(tuple(folds), float(acc.mean()), lo, hi, float(np.mean(macro_fs)), **tags)

    @property
    def ci_width(self) -> float:
        return self.ci_high - self.ci_low


@dataclass(frozen=True)
class EquivalenceVerdict:
    mean_diff: float
    ci_low: float
    ci_high: float
    verdict: str

    @property
    def equivalent(self) -> bool:
        return self.verdict == "equivalent"


def welch_interval(a, b, level: float = EQUIVALENCE_LEVEL):
    """Vectorised Welch interval on mean(a) - mean(b) along the last axis."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = a.shape[-1], b.shape[-1]
    if na < 2 or nb < 2:
        raise ValueError("each side needs at least two values")
    va = a.var(axis=-1, ddof=1) / na
    vb = b.var(axis=-1, ddof=1) / nb
    diff = a.mean(axis=-1) - b.mean(axis=-1)
    se2 = va + vb
    with np.errstate(divide="ignore", invalid="ignore"):
        nu = se2**2 / (va**2 / (na - 1) + vb**2 / (nb - 1))
    nu = np.where(np.isfinite(nu), nu, na + nb - 2)
    half = t_quantile((1 + level) / 2, nu) * np.sqrt(se2)
    return diff, diff - half, diff + half


def unpaired_ttest(values_a, values_b, level: float = EQUIVALENCE_LEVEL) -> EquivalenceVerdict:
    """Equivalent iff the interval on the mean difference contains zero."""
    diff, lo, hi = welch_interval(values_a, values_b, level)
    lo, hi, diff = float(lo), float(hi), float(diff)
    verdict = "equivalent" if lo <= 0.0 <= hi else "different"
    return EquivalenceVerdict(diff, lo, hi, verdict)


# ---------------------------------------------------------------------------
# linear discriminant analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LDAProjection:
    points: np.ndarray
    directions: np.ndarray  # d x k, unit columns
    eigenvalues: np.ndarray
    class_list: tuple
    mean: np.ndarray

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) @ self.directions


def _scatter(X, yi, n_classes):
    mu = X.mean(axis=0)
    d = X.shape[1]
    sw = np.zeros((d, d))
    sb = np.zeros((d, d))
    for c in range(n_classes):
        Xc = X[yi == c]
        mc = Xc.mean(axis=0)
        D = Xc - mc
        sw += D.T @ D
        sb += len(Xc) * np.outer(mc - mu, mc - mu)
    return sw, sb


def _fix_sign(v):
    nz = np.nonzero(np.abs(v) > 1e-12)[0]
    return -v if nz.size and v[nz[0]] < 0 else v


def lda_project(X, y, n_components: int = 2) -> LDAProjection:
    """Top eigenvectors of S_W^-1 S_B with a small ridge on S_W.

    At most ``min(classes - 1, d)`` components are returned.
    """
    X = np.asarray(X, dtype=np.float64)
    y = list(y)
    class_list = tuple(sorted(set(y)))
    if len(class_list) < 2:
        raise ValueError("LDA needs at least two classes")
    index = {c: i for i, c in enumerate(class_list)}
    yi = np.array([index[v] for v in y])
    counts = np.bincount(yi)
    if counts.min() < 2:
        raise ValueError("LDA needs at least two samples per class")
    d = X.shape[1]
    sw, sb = _scatter(X, yi, len(class_list))
    sw = sw + LDA_RIDGE * (np.trace(sw) / d) * np.eye(d)
    try:
        evals, evecs = linalg.eigh(sb, sw)
    except linalg.LinAlgError as exc:
        raise ValueError(f"within-class scatter is singular: {exc}") from exc
    order = np.argsort(-evals, kind="stable")
    k = min(n_components, len(class_list) - 1, d)
    dirs = []
    for i in order[:k]:
        v = evecs[:, i]
        dirs.append(_fix_sign(v / np.linalg.norm(v)))
    W = np.stack(dirs, axis=1)
    mean = X.mean(axis=0)
    return LDAProjection((X - mean) @ W, W, evals[order[:k]], class_list, mean)


def separability_ratio(z, y) -> float:
    """Between-class over within-class variance of the 1-D projection ``z``."""
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    y = np.asarray(list(y))
    mu = z.mean()
    between = within = 0.0
    for c in np.unique(y):
        zc = z[y == c]
        between += len(zc) * (zc.mean() - mu) ** 2
        within += ((zc - zc.mean()) ** 2).sum()
    return float(between / within) if within > 0 else float("inf")


def heldout_separability(z_train, y_train, z_test, y_test) -> float:
    """Separability of held-out points around the training class centres.

    Between-class variance uses training centres and class shares; within
    variance is the mean squared distance of each test point to its class's
    training centre.
    """
    z_train = np.asarray(z_train, dtype=np.float64).reshape(-1)
    z_test = np.asarray(z_test, dtype=np.float64).reshape(-1)
    y_train = np.asarray(list(y_train))
    y_test = np.asarray(list(y_test))
    mu = z_train.mean()
    centres = {c: z_train[y_train == c].mean() for c in np.unique(y_train)}
    between = sum((y_train == c).mean() * (m - mu) ** 2 for c, m in centres.items())
    within = np.mean([(z - centres[c]) ** 2 for z, c in zip(z_test, y_test)])
    return float(between / within) if within > 0 else float("inf")
