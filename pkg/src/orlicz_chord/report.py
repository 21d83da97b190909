"""CSV report rows.

RFC-4180 quoting, '.' decimal point, reals with 17 significant digits so
every double round-trips.  ``wall_time`` is the only column that is not
reproducible between runs.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields

COLUMNS = (
    "task_id",
    "functional",
    "inputs_digest",
    "i",
    "p_or_gauge",
    "rule_id",
    "value",
    "lhs",
    "rhs",
    "slack",
    "relative_slack",
    "error_estimate",
    "equality_flag",
    "status",
    "wall_time",
)


@dataclass
class ReportRow:
    task_id: str
    functional: str
    inputs_digest: str = ""
    i: int | None = None
    p_or_gauge: str = ""
    rule_id: str = ""
    value: float | None = None
    lhs: float | None = None
    rhs: float | None = None
    slack: float | None = None
    relative_slack: float | None = None
    error_estimate: float | None = None
    equality_flag: bool | None = None
    status: str = "ok"
    wall_time: float | None = None

    @classmethod
    def from_report(cls, task_id, rep, p_or_gauge="", i=None, rule_id="", wall_time=None):
        return cls(
            task_id=task_id,
            functional=rep.name,
            inputs_digest=rep.inputs_digest,
            i=i,
            p_or_gauge=p_or_gauge,
            rule_id=rule_id,
            lhs=rep.lhs,
            rhs=rep.rhs,
            slack=rep.slack,
            relative_slack=rep.relative_slack,
            error_estimate=rep.error_estimate,
            equality_flag=rep.equality_flag,
            status="ok" if rep.holds else "fail",
            wall_time=wall_time,
        )


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def format_rows(rows, include_wall_time=True) -> str:
    cols = COLUMNS if include_wall_time else COLUMNS[:-1]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(cols)
    names = [f.name for f in fields(ReportRow)]
    for row in rows:
        values = dict(zip(names, (getattr(row, n) for n in names)))
        writer.writerow([_cell(values[c]) for c in cols])
    return buf.getvalue()


def write_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_rows(rows))


def strip_wall_time(text: str) -> str:
    """Drop the last column, for comparing two runs."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\r\n")
    for rec in csv.reader(io.StringIO(text)):
        writer.writerow(rec[:-1])
    return out.getvalue()
