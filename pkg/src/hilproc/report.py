"""Machine-readable outputs: the per-horizon CSV and the JSON report.

Both writers are deterministic functions of their inputs: float cells use
``repr`` (shortest round-trip form), dict keys are sorted, and nothing
time- or environment-dependent is written.  Identical (config, seed) runs
therefore produce byte-identical files regardless of thread count.
"""

from __future__ import annotations

import csv
import io
import json
import math

__all__ = ["CSV_COLUMNS", "points_csv", "write_points_csv", "read_points_csv", "report_json"]

CSV_COLUMNS = [
    "n",
    "delta_hat",
    "mc_error",
    "delta_main",
    "theorem_bound",
    "density_bound",
    "weighted_sum_1",
    "sup_innov",
    "orlicz_qr",
    "c1_hat",
    "flag",
]


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        if not math.isfinite(value):
            return ""  # non-finite values are blanked; the flag column explains
        return repr(value)
    return str(value)


def _row(report):
    flag = "" if report.above_noise_floor else "below_noise_floor"
    if report.density_bound is not None and not math.isfinite(report.density_bound):
        flag = (flag + ";" if flag else "") + "unbounded_density"
    return {
        "n": report.n,
        "delta_hat": report.delta_hat,
        "mc_error": report.mc_error,
        "delta_main": report.delta_main,
        "theorem_bound": report.theorem_bound,
        "density_bound": report.density_bound,
        "weighted_sum_1": report.weighted_sum_1,
        "sup_innov": report.sup_innov,
        "orlicz_qr": report.orlicz_qr,
        "c1_hat": report.c1_hat,
        "flag": flag,
    }


def points_csv(reports) -> str:
    """Render per-horizon reports as CSV text (stable column schema)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        row = _row(rep)
        writer.writerow([_cell(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_points_csv(path, reports):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(points_csv(reports))


def read_points_csv(path):
    """Rows back as dicts with floats parsed; used by the plot subcommand."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        parsed = {}
        for key, val in row.items():
            if key in ("flag",):
                parsed[key] = val
            elif key == "n":
                parsed[key] = int(val)
            else:
                parsed[key] = float(val) if val not in ("", None) else None
        out.append(parsed)
    return out


def report_json(payload) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""

    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        if isinstance(obj, float) and not math.isfinite(obj):
            return None
        if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
            return obj.item()
        return obj

    return json.dumps(clean(payload), sort_keys=True, indent=2) + "\n"
