import math

import pytest

from harbench.experiment import ResultRow
from harbench.report import (
    CSV_COLUMNS,
    emit_report,
    fold_series_csv,
    from_csv,
    from_json,
    lda_points_csv,
    to_csv,
    to_json,
    to_markdown,
)


def _rows():
    return [
        ResultRow("kwapisz", "ds1", "SNCV", "ok", 0.1 + 0.2, 0.25, 0.35, 2 / 3, [0.1, 1 / 3], [0.2, 2 / 7],
                  {"overlap_pairs": 12, "same_trial_pairs": 30, "same_subject_pairs": 40}, 1.5, "abc", "fp", ""),
        ResultRow("jiang_yin", "ds1", "SNCV", "infeasible", reason="needs 5 columns"),
        ResultRow("kwapisz", "ds2", "SNCV", "ok", 0.5, 0.4, 0.6, 0.5, [0.4, 0.6], [0.5, 0.5], {}, 0.1),
    ]


def test_empty_table_is_header_only():
    assert to_csv([]).strip() == ",".join(CSV_COLUMNS)
    assert from_json(to_json([])) == []
    assert to_markdown([]).startswith("| Method")


def test_csv_round_trip_full_precision():
    back = from_csv(to_csv(_rows()))
    for a, b in zip(_rows(), back):
        for k in ("mean_accuracy", "ci_low", "ci_high", "mean_macro_f"):
            x, y = getattr(a, k), getattr(b, k)
            assert (math.isnan(x) and math.isnan(y)) or x == y
        assert a.fold_accuracies == b.fold_accuracies
        assert a.leakage == b.leakage


def test_json_csv_json():
    rows = from_json(to_json(from_csv(to_csv(_rows()))))
    assert to_json(rows) == to_json(_rows())


def test_markdown_layout():
    md = to_markdown(_rows())
    lines = [l for l in md.splitlines() if l.startswith("|")]
    assert lines[0] == "| Method | ds1 | ds2 | Mean |"
    assert lines[2].startswith("| kwapisz | 30.00 [5.00] | 50.00 [10.00] | 40.00")
    assert lines[3] == "| jiang_yin | − | − | − |"


def test_unknown_format():
    with pytest.raises(ValueError):
        emit_report(_rows(), "xlsx")


def test_plot_series():
    lines = fold_series_csv(_rows()).splitlines()
    assert lines[0] == "method,dataset,combination,fold,accuracy,macro_f"
    assert len(lines) == 1 + 4
    import numpy as np

    pts = lda_points_csv(np.zeros((2, 1)), ["a", "b"], np.ones((1, 1)), ["a"]).splitlines()
    assert pts == ["split,label,lda1", "train,a,0.0", "train,b,0.0", "test,a,1.0"]
