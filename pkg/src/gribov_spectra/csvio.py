"""Deterministic CSV output: a version line, a column header, then data rows."""

from __future__ import annotations

import csv
import io
import math
import os
from typing import Iterable, Sequence

from . import __version__


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    if isinstance(v, float) or hasattr(v, "__float__") and not isinstance(v, str):
        x = float(v)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return "%.17g" % x
    return str(v)


def banner(meta: dict | None = None) -> str:
    """``# gribov-spectra v<version>`` followed by ``key=value`` settings."""
    parts = [f"# gribov-spectra v{__version__}"]
    for k, v in (meta or {}).items():
        text = repr(float(v)) if isinstance(v, float) else format_value(v)
        parts.append(f"{k}={text}")
    return " ".join(parts)


def render_csv(columns: Sequence[str], rows: Iterable[Sequence], meta: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(banner(meta) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_text(path: str, text: str, overwrite: bool = False) -> None:
    """Write ``text`` to ``path``; an existing file is an error unless ``overwrite``."""
    if os.path.exists(path) and not overwrite:
        raise FileExistsError(f"{path} exists (pass --overwrite to replace it)")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_csv(path: str) -> tuple[str, list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline().rstrip("\n")
        rows = list(csv.reader(fh))
    return first, rows[0], rows[1:]
