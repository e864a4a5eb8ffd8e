"""Deterministic delimited-table reading and writing.

Floats are written with shortest round-trip repr so staged reruns consume
bit-identical values; lines end with "\\n" regardless of platform. Lines
starting with '#' are comments and are skipped on read.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .errors import InputFormatError


def fmt_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_table(
    header: list[str],
    rows: list[list],
    comments_top: list[str] | None = None,
    comments_bottom: list[str] | None = None,
) -> str:
    buf = io.StringIO()
    for line in comments_top or []:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_cell(v) for v in row])
    for line in comments_bottom or []:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def write_table(path, header, rows, comments_top=None, comments_bottom=None) -> None:
    Path(path).write_text(
        render_table(header, rows, comments_top, comments_bottom), encoding="utf-8"
    )


def read_table(path) -> tuple[list[str], list[list[str]]]:
    """Read a table written by write_table; returns (header, rows)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise InputFormatError(f"{path}: no table content")
    reader = csv.reader(lines)
    header = next(reader)
    return header, [row for row in reader]
