"""CSV serialisation of error reports."""

from __future__ import annotations

import csv
import io
import math
import sys
from pathlib import Path

from .study import ErrorReport, ErrorRow

HEADER = ("method", "function", "d", "boundary_mode", "level", "n", "error_norm", "error", "wall_ms", "seed")


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def render_report(report: ErrorReport, *, timing: bool = False) -> str:
    """CSV text: header, rows grouped by method and sorted by level, then ``#`` slope lines.

    ``wall_ms`` is left blank unless ``timing`` is set, so reruns are
    byte-identical.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for method in report.methods:
        for r in report.rows_for(method):
            writer.writerow([
                r.method, r.function, r.d, r.boundary_mode, r.level, r.n, r.error_norm,
                format_float(r.error), format_float(r.wall_ms) if timing else "", r.seed,
            ])
    for method in report.methods:
        buf.write(
            f"# slope method={method} log2_error_vs_level={format_float(report.slope(method))} "
            f"log_error_vs_log_n={format_float(report.slope_vs_n(method))}\n"
        )
    return buf.getvalue()


def emit_report(report: ErrorReport, destination, *, timing: bool = False) -> None:
    """Write the report to a path (overwriting), an open text stream, or ``-`` for stdout."""
    text = render_report(report, timing=timing)
    if destination == "-":
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)


def read_report(source) -> ErrorReport:
    """Parse a CSV written by :func:`emit_report`, ignoring comment lines."""
    text = Path(source).read_text() if not hasattr(source, "read") else source.read()
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    report = ErrorReport()
    for rec in csv.DictReader(lines):
        report.rows.append(ErrorRow(
            rec["method"], rec["function"], int(rec["d"]), rec["boundary_mode"], int(rec["level"]),
            int(rec["n"]), rec["error_norm"], float(rec["error"]),
            float(rec["wall_ms"]) if rec["wall_ms"] else math.nan, int(rec["seed"]),
        ))
    return report
