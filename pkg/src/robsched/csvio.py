"""CSV writing with a fixed numeric format (12 significant digits)."""
from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.12g}"
    if hasattr(value, "item"):  # numpy scalar
        return fmt(value.item())
    return str(value)


def write_csv(fh, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def to_csv_string(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()
