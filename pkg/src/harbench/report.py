"""Report emission: JSON, flat CSV and Markdown tables, plus plot-ready series."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict

from .experiment import INFEASIBLE, METHODS_ORDER, ResultRow

FORMATS = ("json", "csv", "markdown")
SCALARS = (
    "method",
    "dataset",
    "combination",
    "status",
    "mean_accuracy",
    "ci_low",
    "ci_high",
    "mean_macro_f",
    "wall_time",
    "config_hash",
    "plan_fingerprint",
    "reason",
)
LIST_COLS = ("fold_accuracies", "fold_macro_f")
LEAK_COLS = ("overlap_pairs", "same_trial_pairs", "same_subject_pairs")
CSV_COLUMNS = SCALARS + LIST_COLS + tuple(f"leak_{c}" for c in LEAK_COLS)
_FLOATS = ("mean_accuracy", "ci_low", "ci_high", "mean_macro_f", "wall_time")


def _f(v) -> str:
    return repr(float(v))


def to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        d = asdict(r)
        line = [(_f(d[c]) if c in _FLOATS else d[c]) for c in SCALARS]
        line += [";".join(_f(v) for v in d[c]) for c in LIST_COLS]
        line += [d["leakage"].get(c, "") for c in LEAK_COLS]
        w.writerow(line)
    return buf.getvalue()


def from_csv(text: str) -> list[ResultRow]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        kw = {c: rec[c] for c in SCALARS}
        for c in _FLOATS:
            kw[c] = float(kw[c])
        for c in LIST_COLS:
            kw[c] = [float(v) for v in rec[c].split(";")] if rec[c] else []
        kw["leakage"] = {c: int(rec[f"leak_{c}"]) for c in LEAK_COLS if rec[f"leak_{c}"] != ""}
        rows.append(ResultRow(**kw))
    return rows


def to_json(rows) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None
        return v

    docs = []
    for r in rows:
        d = asdict(r)
        docs.append({k: clean(v) for k, v in d.items()})
    return json.dumps({"columns": list(CSV_COLUMNS), "rows": docs}, indent=2)


def from_json(text: str) -> list[ResultRow]:
    doc = json.loads(text)
    out = []
    for d in doc["rows"]:
        d = {k: (float("nan") if v is None and k in _FLOATS else v) for k, v in d.items()}
        out.append(ResultRow(**d))
    return out


def _cell(r: ResultRow | None) -> str:
    if r is None or not r.feasible:
        return INFEASIBLE
    half = (r.ci_high - r.ci_low) / 2 * 100
    return f"{r.mean_accuracy * 100:.2f} [{half:.2f}]"


def to_markdown(rows) -> str:
    """One table per combination: method rows, dataset columns, mean column.

    Cells are ``mean accuracy [CI half-width]`` in percent; infeasible runs
    show the dash marker.
    """
    if not rows:
        return "| Method | Mean |\n|---|---|\n"
    out = []
    for comb in dict.fromkeys(r.combination for r in rows):
        sub = [r for r in rows if r.combination == comb]
        datasets = list(dict.fromkeys(r.dataset for r in sub))
        methods = sorted(dict.fromkeys(r.method for r in sub), key=lambda m: (METHODS_ORDER + (m,)).index(m))
        out.append(f"**{comb}**\n")
        out.append("| Method | " + " | ".join(datasets) + " | Mean |")
        out.append("|---" * (len(datasets) + 2) + "|")
        for m in methods:
            cells, accs = [], []
            for ds in datasets:
                r = next((x for x in sub if x.method == m and x.dataset == ds), None)
                cells.append(_cell(r))
                if r is not None and r.feasible:
                    accs.append(r.mean_accuracy)
            mean = f"{sum(accs) / len(accs) * 100:.2f}" if accs else INFEASIBLE
            out.append(f"| {m} | " + " | ".join(cells) + f" | {mean} |")
        out.append("")
    return "\n".join(out)


def emit_report(rows, fmt: str) -> str:
    if fmt == "json":
        return to_json(rows)
    if fmt == "csv":
        return to_csv(rows)
    if fmt == "markdown":
        return to_markdown(rows)
    raise ValueError(f"unknown report format {fmt!r}; expected one of {FORMATS}")


def fold_series_csv(rows) -> str:
    """Per-fold accuracy series, one line per (row, fold)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "dataset", "combination", "fold", "accuracy", "macro_f"])
    for r in rows:
        for i, (a, f) in enumerate(zip(r.fold_accuracies, r.fold_macro_f)):
            w.writerow([r.method, r.dataset, r.combination, i, _f(a), _f(f)])
    return buf.getvalue()


def lda_points_csv(train_points, train_labels, test_points, test_labels) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    k = train_points.shape[1]
    w.writerow(["split", "label"] + [f"lda{i + 1}" for i in range(k)])
    for split, pts, labs in (("train", train_points, train_labels), ("test", test_points, test_labels)):
        for p, lab in zip(pts, labs):
            w.writerow([split, lab] + [_f(v) for v in p])
    return buf.getvalue()
