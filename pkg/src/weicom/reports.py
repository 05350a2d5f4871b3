"""Report serialization and aligned plain-text tables.

Evaluation reports render as one row per method with one column per
attribute plus an unweighted average; sweep reports render with the
lambda grid as columns and attributes as rows.  Text tables show
percentages with two decimals; JSON carries both the fraction and the
percentage at full precision.  Serialization is byte-deterministic for
identical inputs.
"""

from __future__ import annotations

import json
from typing import Sequence

from .benchmark import EvalReport, SweepReport
from .fusion import MethodKind


def _method_fields(report: EvalReport) -> dict:
    fields = {"method": report.method.kind.value}
    if report.method.kind is MethodKind.WEICOM:
        fields["lambda"] = report.method.lam
    return fields


def eval_report_dict(report: EvalReport) -> dict:
    per_attribute = {
        attr: {
            "map": value,
            "map_pct": 100.0 * value,
            "queries": report.query_counts[attr],
        }
        for attr, value in sorted(report.per_attribute.items())
    }
    return {
        **_method_fields(report),
        "exclude_query_image": report.exclude_query_image,
        "query_count": report.query_count,
        "dropped_queries": report.dropped,
        "per_attribute": per_attribute,
        "average": {"map": report.average_map, "map_pct": 100.0 * report.average_map},
    }


def sweep_report_dict(report: SweepReport) -> dict:
    return {
        "method": "weicom",
        "lambda_grid": list(report.lambda_grid),
        "best_lambda": report.best_lambda,
        "exclude_query_image": report.exclude_query_image,
        "query_count": report.query_count,
        "dropped_queries": report.dropped,
        "per_attribute": {
            attr: {"map": list(row), "map_pct": [100.0 * v for v in row]}
            for attr, row in sorted(report.per_attribute.items())
        },
        "average": {
            "map": list(report.average_row),
            "map_pct": [100.0 * v for v in report.average_row],
        },
    }


def to_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _format_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = []
    for row in [header] + rows:
        cells = [row[0].ljust(widths[0])]
        cells += [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def render_eval_table(reports: EvalReport | Sequence[EvalReport]) -> str:
    """Attribute-modification mAP (%) table: methods as rows, attributes as columns."""
    if isinstance(reports, EvalReport):
        reports = [reports]
    attributes = sorted({a for r in reports for a in r.per_attribute})
    header = ["Method"] + [a.capitalize() for a in attributes] + ["Avg"]
    rows = []
    for r in reports:
        label = r.method.kind.value
        if r.method.kind is MethodKind.WEICOM:
            label = f"weicom[{r.method.lam:g}]"
        cells = [f"{100.0 * r.per_attribute.get(a, 0.0):.2f}" for a in attributes]
        rows.append([label] + cells + [f"{100.0 * r.average_map:.2f}"])
    return _format_table(header, rows)


def render_sweep_table(report: SweepReport) -> str:
    """Lambda-sweep mAP (%) table: attributes as rows, the lambda grid as columns."""
    header = ["lambda"] + [f"{lam:g}" for lam in report.lambda_grid]
    rows = []
    for attr in sorted(report.per_attribute):
        rows.append(
            [attr] + [f"{100.0 * v:.2f}" for v in report.per_attribute[attr]]
        )
    rows.append(["average"] + [f"{100.0 * v:.2f}" for v in report.average_row])
    table = _format_table(header, rows)
    return table + f"best average mAP at lambda={report.best_lambda:g}\n"
