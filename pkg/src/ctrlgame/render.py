"""Payload builders and text renderers shared by the CLI and the HTTP API.

Every command builds one JSON-serializable payload here; the CLI either
dumps it as JSON or formats it as a table/CSV, and the HTTP service returns
it verbatim.  Keeping a single path guarantees both surfaces emit identical
JSON for identical inputs.
"""

from __future__ import annotations

import csv
import io
from typing import Any, Sequence

from .dsl import format_number
from .game import PlayResult
from .jsonio import SCHEMA_VERSION
from .model import Diagnostic, ModelSpec, expansion_rows, model_matrix
from .valuation import GameMatrix, combination_cost
from .whatif import SensitivityReport, SweepEntry

__all__ = [
    "validate_payload",
    "expand_payload",
    "matrix_payload",
    "play_payload",
    "sweep_payload",
    "sensitivity_payload",
    "residual_payload",
    "render_table",
    "render_csv",
]


def _versioned(body: dict[str, Any]) -> dict[str, Any]:
    return {"schema_version": SCHEMA_VERSION, **body}


def validate_payload(diagnostics: Sequence[Diagnostic]) -> dict[str, Any]:
    return _versioned(
        {
            "ok": not any(d.severity == "error" for d in diagnostics),
            "diagnostics": [
                {
                    "severity": d.severity,
                    "code": d.code,
                    "message": d.message,
                    "location": d.location,
                }
                for d in diagnostics
            ],
        }
    )


def expand_payload(spec: ModelSpec, budget: float | None = None) -> dict[str, Any]:
    effective = spec.budget if budget is None else budget
    return _versioned(
        {
            "model": spec.name,
            "budget": float(effective),
            "rows": [
                {
                    "id": row.label,
                    "combination": spec.combination_label(row.combination).split(" ")
                    if row.combination.atoms
                    else [],
                    "label": spec.combination_label(row.combination),
                    "cost": float(row.cost),
                    "valid": row.valid,
                }
                for row in expansion_rows(spec, budget)
            ],
        }
    )


def matrix_payload(spec: ModelSpec, budget: float | None = None) -> dict[str, Any]:
    effective = spec.budget if budget is None else budget
    gm = model_matrix(spec, budget)
    return _versioned(
        {
            "model": spec.name,
            "budget": float(effective),
            "columns": [str(cell) for cell in gm.columns],
            "rows": [
                {
                    "id": label,
                    "label": spec.combination_label(p),
                    "combination": spec.combination_label(p).split(" ")
                    if p.atoms
                    else [],
                    "payoffs": [float(v) for v in gm.payoff[i]],
                }
                for i, (label, p) in enumerate(zip(gm.row_labels, gm.rows))
            ],
        }
    )


def _play_body(spec: ModelSpec, result: PlayResult, profile_name: str) -> dict[str, Any]:
    costs = spec.cost_table()
    suggested = sorted(
        zip(result.suggested_labels, result.suggested),
        key=lambda item: (combination_cost(item[1], costs), item[1].sorted_atoms),
    )
    return {
        "profile": profile_name,
        "stages": [
            {
                "stage": outcome.stage,
                "cells": [str(cell) for cell in outcome.cells],
                "best": outcome.best,
                "survivors": list(outcome.survivors),
            }
            for outcome in result.stages
        ],
        "suggested": [spec.combination_label(p) for _, p in suggested],
        "suggested_rows": [
            {
                "id": label,
                "label": spec.combination_label(p),
                "combination": spec.combination_label(p).split(" ") if p.atoms else [],
                "cost": float(combination_cost(p, costs)),
            }
            for label, p in suggested
        ],
        "trace": result.trace,
    }


def play_payload(
    spec: ModelSpec, result: PlayResult, profile_name: str, budget: float | None = None
) -> dict[str, Any]:
    effective = spec.budget if budget is None else budget
    return _versioned(
        {"model": spec.name, "budget": float(effective), **_play_body(spec, result, profile_name)}
    )


def sweep_payload(
    spec: ModelSpec, entries: Sequence[SweepEntry], profile_name: str
) -> dict[str, Any]:
    rendered = []
    for entry in entries:
        if entry.result is not None:
            rendered.append(
                {
                    "budget": float(entry.budget),
                    "result": _play_body(spec, entry.result, profile_name),
                }
            )
        else:
            rendered.append(
                {
                    "budget": float(entry.budget),
                    "error": {
                        "code": "no-strategies" if entry.no_strategies else "error",
                        "message": entry.error or "",
                    },
                }
            )
    return _versioned({"model": spec.name, "profile": profile_name, "entries": rendered})


def sensitivity_payload(spec: ModelSpec, report: SensitivityReport) -> dict[str, Any]:
    row_ids = {
        row.combination: row.label for row in expansion_rows(spec)
    }

    def ids_of(combos) -> list[str]:
        return sorted(
            (row_ids.get(p, spec.combination_label(p)) for p in combos),
            key=lambda label: (len(label), label),
        )

    return _versioned(
        {
            "model": spec.name,
            "profile": report.profile,
            "delta": report.delta,
            "baseline_suggested": ids_of(report.baseline.suggested),
            "stable": len(report.stable_entries),
            "unstable": len(report.unstable_entries),
            "entries": [
                {
                    "control": entry.control,
                    "cell": str(entry.cell),
                    "value": entry.value,
                    "stable": entry.stable,
                    "changed_up": entry.changed_up,
                    "changed_down": entry.changed_down,
                    "suggested_up": ids_of(entry.suggested_up),
                    "suggested_down": ids_of(entry.suggested_down),
                }
                for entry in report.entries
            ],
        }
    )


def residual_payload(
    spec: ModelSpec,
    gm: GameMatrix,
    row_id: str,
    flagged: Sequence[tuple],
    threshold: float,
    budget: float | None = None,
) -> dict[str, Any]:
    effective = spec.budget if budget is None else budget
    p = gm.rows[gm.row_labels.index(row_id)]
    return _versioned(
        {
            "model": spec.name,
            "budget": float(effective),
            "combination": row_id,
            "label": spec.combination_label(p),
            "threshold": float(threshold),
            "cells": [
                {"cell": str(cell), "effectiveness": float(value)}
                for cell, value in flagged
            ],
        }
    )


# ── text rendering ──────────────────────────────────────────────────


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _table(headers: list[str], rows: list[list[Any]]) -> str:
    cells = [[_fmt(v) for v in row] for row in rows]
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in cells)) if cells else len(headers[i])
        for i in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def _tabular(payload: dict[str, Any]) -> tuple[list[str], list[list[Any]], str]:
    """Headers, rows, and a footer for whichever payload kind this is."""
    if "rows" in payload and "columns" in payload:  # matrix
        headers = ["ID", "Combination", *payload["columns"]]
        rows = [
            [row["id"], row["label"], *row["payoffs"]] for row in payload["rows"]
        ]
        return headers, rows, f"budget {format_number(payload['budget'])}"
    if "rows" in payload:  # expansion
        headers = ["ID", "Combination", "Cost", "Valid"]
        rows = [
            [row["id"], row["label"], row["cost"], row["valid"]]
            for row in payload["rows"]
        ]
        return headers, rows, f"budget {format_number(payload['budget'])}"
    if "stages" in payload:  # play
        headers = ["Stage", "Cells", "Best total", "Survivors"]
        rows = [
            [
                stage["stage"],
                ", ".join(stage["cells"]),
                stage["best"],
                ", ".join(stage["survivors"]),
            ]
            for stage in payload["stages"]
        ]
        footer = "suggested: " + "; ".join(
            f"{row['id']} ({row['label']}, cost {format_number(row['cost'])})"
            for row in payload["suggested_rows"]
        )
        return headers, rows, footer
    if "entries" in payload and "delta" in payload:  # sensitivity
        headers = ["Control", "Cell", "Value", "Stable", "Changed up", "Changed down"]
        rows = [
            [
                e["control"],
                e["cell"],
                e["value"],
                e["stable"],
                e["changed_up"],
                e["changed_down"],
            ]
            for e in payload["entries"]
        ]
        footer = (
            f"baseline: {', '.join(payload['baseline_suggested'])}; "
            f"{payload['stable']} stable, {payload['unstable']} unstable "
            f"at delta {format_number(payload['delta'])}"
        )
        return headers, rows, footer
    if "entries" in payload:  # sweep
        headers = ["Budget", "Suggested", "Final best", "Note"]
        rows = []
        for entry in payload["entries"]:
            if "result" in entry:
                result = entry["result"]
                rows.append(
                    [
                        entry["budget"],
                        ", ".join(result["suggested"]),
                        result["stages"][-1]["best"],
                        "",
                    ]
                )
            else:
                rows.append([entry["budget"], "", "", entry["error"]["code"]])
        return headers, rows, f"profile {payload['profile']}"
    if "cells" in payload:  # residual risk
        headers = ["Cell", "Effectiveness"]
        rows = [[c["cell"], c["effectiveness"]] for c in payload["cells"]]
        footer = (
            f"{payload['combination']} ({payload['label']}) below "
            f"threshold {format_number(payload['threshold'])}"
        )
        return headers, rows, footer
    if "diagnostics" in payload:  # validate
        headers = ["Severity", "Code", "Location", "Message"]
        rows = [
            [d["severity"], d["code"], d["location"], d["message"]]
            for d in payload["diagnostics"]
        ]
        footer = "model OK" if payload["ok"] and not rows else ""
        return headers, rows, footer
    raise ValueError("unrenderable payload")


def render_table(payload: dict[str, Any]) -> str:
    headers, rows, footer = _tabular(payload)
    if not rows and footer:
        return footer
    text = _table(headers, rows)
    return f"{text}\n{footer}" if footer else text


def render_csv(payload: dict[str, Any]) -> str:
    headers, rows, _ = _tabular(payload)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else _fmt(v) for v in row])
    return buffer.getvalue()
