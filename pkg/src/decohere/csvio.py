"""Plot-ready CSV files with a single ``#`` header line.

Layout::

    # decohere <version> kind=<kind> columns=<c1>,<c2>,...
    <v1>,<v2>,...

Numbers are written with 17 significant digits so they round-trip exactly.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import DomainError

__all__ = ["CsvTable", "write_csv", "format_csv", "read_csv"]


@dataclass
class CsvTable:
    kind: str
    columns: list
    data: np.ndarray
    version: str = __version__

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % v


def format_csv(kind: str, columns, rows) -> str:
    columns = list(columns)
    if any("," in c or " " in c for c in columns):
        raise DomainError("column names may not contain commas or spaces")
    buf = io.StringIO()
    buf.write(f"# decohere {__version__} kind={kind} columns={','.join(columns)}\n")
    for row in rows:
        if len(row) != len(columns):
            raise DomainError("row length does not match column count")
        buf.write(",".join(_fmt(v) for v in row))
        buf.write("\n")
    return buf.getvalue()


def write_csv(path, kind: str, columns, rows) -> str:
    """Write rows to ``path`` (``"-"`` for stdout is handled by the caller)."""
    text = format_csv(kind, columns, rows)
    if path is not None:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(path_or_text) -> CsvTable:
    if isinstance(path_or_text, str) and path_or_text.startswith("# decohere"):
        text = path_or_text
    else:
        with open(path_or_text) as fh:
            text = fh.read()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# decohere "):
        raise DomainError("missing '# decohere' header line")
    meta = dict(tok.split("=", 1) for tok in lines[0].split()[3:] if "=" in tok)
    version = lines[0].split()[2]
    if "columns" not in meta:
        raise DomainError("header does not name columns")
    columns = meta["columns"].split(",")
    body = [ln for ln in lines[1:] if ln.strip()]
    data = np.array([[float(v) for v in ln.split(",")] for ln in body],
                    dtype=float).reshape(len(body), len(columns))
    return CsvTable(meta.get("kind", ""), columns, data, version)
