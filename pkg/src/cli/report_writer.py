"""Serialization of experiment reports: JSON, generic CSV and plot tables."""

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Optional

from ..exceptions import ValidationError
from ..models.schemas import SWEEP_KINDS, ExperimentKind, ExperimentReport

logger = logging.getLogger("cli")

ROW_COLUMNS = ["name", "x", "estimate", "ci_lo", "ci_hi", "target", "passed"]


def format_value(value) -> str:
    """CSV cell: floats with 17 significant digits, booleans lower-case, None empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render_json(report: ExperimentReport) -> str:
    data = report.model_dump(mode="json")
    if data.get("wall_time_seconds") is None:
        data.pop("wall_time_seconds", None)
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _csv_text(table: list[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for row in table:
        writer.writerow([format_value(cell) for cell in row])
    return buffer.getvalue()


def render_csv(report: ExperimentReport) -> str:
    """Generic row table, one line per report row."""
    table = [ROW_COLUMNS]
    for row in report.rows:
        table.append([row.name, row.x, row.estimate, row.ci_lo, row.ci_hi, row.target, row.passed])
    return _csv_text(table)


def emit_plot_table(report: ExperimentReport) -> list[list]:
    """Long-format table of a sweep-like report, header first."""
    if report.kind not in SWEEP_KINDS:
        raise ValidationError("Plot tables exist only for sweep reports", report.kind.value)
    if report.kind is ExperimentKind.DEPTH_SWEEP:
        table = [["experiment", "x", "estimate", "ci_lo", "ci_hi", "target"]]
        for row in report.rows:
            if row.name in ("depth", "ratio"):
                table.append([row.name, row.x, row.estimate, row.ci_lo, row.ci_hi, row.target])
        return table
    if report.kind is ExperimentKind.INTERVALS:
        table = [["experiment", "scheme", "n", "lo", "hi", "coverage"]]
        for row in report.rows:
            if "coverage" in row.values:
                table.append(["intervals", row.name, row.x, row.ci_lo, row.ci_hi, row.values["coverage"]])
        return table
    table = [["experiment", "start_id", "final_loss", "oracle_loss", "classification"]]
    for row in report.rows:
        if row.name == "start":
            table.append(["landscape", row.x, row.estimate, row.target, row.values.get("classification")])
    return table


def render_plot_table(report: ExperimentReport) -> str:
    return _csv_text(emit_plot_table(report))


def write_atomic(path: Path, text: str) -> None:
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    fd, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    logger.info("📝 Report written to %s", path)


def render(report: ExperimentReport, fmt: str) -> str:
    return render_json(report) if fmt == "json" else render_csv(report)


def finite_or_none(value) -> Optional[float]:
    """Reports carry no NaN or infinity; undefined numbers become null."""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None
