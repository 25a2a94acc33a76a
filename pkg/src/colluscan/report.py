"""Run report rendering: json, csv, and markdown.

The primary report file is byte-stable for a given corpus, config, and
seed: field order is fixed, floats carry 6 significant digits, and
wall-clock timings go to a separate ``*.timings.json`` companion so the
deterministic payload never varies between identical runs.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .pipeline import RunReport

FORMATS = ("json", "csv", "markdown")
METRIC_COLUMNS = ("tpr", "fpr", "accuracy", "auc")


def _round_sig(value: float, digits: int = 6) -> float:
    return float(f"{value:.{digits}g}")


def _canonical(obj):
    if isinstance(obj, dict):
        return {k: _canonical(obj[k]) for k in obj}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return _round_sig(obj)
    return obj


def report_obj(report: RunReport) -> dict:
    return _canonical(report.deterministic_obj())


def _fmt_cell(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{_round_sig(value):g}"
    return str(value)


def _metric_rows(obj: dict) -> list[dict]:
    """Flatten per-fold metrics (plus a mean row) for tabular formats."""
    rows = []
    one_class = obj["task"] in ("likes", "subscriptions")
    for fold in obj["per_fold"]:
        if one_class:
            for kind, metrics in fold.items():
                if kind == "fold":
                    continue
                row = {"fold": fold["fold"], "model": kind}
                row.update({c: metrics.get(c) for c in METRIC_COLUMNS})
                rows.append(row)
        else:
            row = {"fold": fold["fold"], "model": "dac"}
            row.update({c: fold.get(c) for c in METRIC_COLUMNS})
            rows.append(row)
    if one_class:
        for kind, metrics in obj["mean"].items():
            row = {"fold": "mean", "model": kind}
            row.update({c: metrics.get(c) for c in METRIC_COLUMNS})
            rows.append(row)
    else:
        row = {"fold": "mean", "model": "dac"}
        row.update({c: obj["mean"].get(c) for c in METRIC_COLUMNS})
        rows.append(row)
    return rows


def render_csv(obj: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["task", "fold", "model", *METRIC_COLUMNS])
    for row in _metric_rows(obj):
        writer.writerow([obj["task"], row["fold"], row["model"],
                         *(_fmt_cell(row[c]) for c in METRIC_COLUMNS)])
    return buf.getvalue()


def render_markdown(obj: dict) -> str:
    lines = [f"# Task report: {obj['task']}", ""]
    lines.append("| fold | model | " + " | ".join(METRIC_COLUMNS) + " |")
    lines.append("|" + "---|" * (len(METRIC_COLUMNS) + 2))
    for row in _metric_rows(obj):
        cells = [str(row["fold"]), row["model"],
                 *(_fmt_cell(row[c]) for c in METRIC_COLUMNS)]
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    lines.append("## Feature importances")
    lines.append("")
    if obj["feature_importances"]:
        for name, value in obj["feature_importances"]:
            lines.append(f"- {name}: {_fmt_cell(value)}")
    else:
        lines.append("- n/a")
    lines.append("")
    lines.append("## Propagation")
    lines.append("")
    if obj.get("propagation"):
        lines.append("```json")
        lines.append(json.dumps(obj["propagation"], indent=2, sort_keys=True))
        lines.append("```")
    else:
        lines.append("n/a")
    lines.append("")
    return "\n".join(lines)


def write_report(report: RunReport, path, fmt: str = "json") -> Path:
    """Write the deterministic report; timings land in a companion file."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format '{fmt}'")
    path = Path(path)
    obj = report_obj(report)
    if fmt == "json":
        text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        text = render_csv(obj)
    else:
        text = render_markdown(obj)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)
    timings_path = path.with_name(path.stem + ".timings.json")
    timings_path.write_text(
        json.dumps(_canonical(report.timings), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    return path
