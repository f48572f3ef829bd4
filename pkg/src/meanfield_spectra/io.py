"""CSV/JSON emission with a provenance header."""

from __future__ import annotations

import csv
import json
import math
from typing import IO, Iterable, Sequence


def _plain(v):
    if hasattr(v, "item") and not isinstance(v, (list, tuple, dict)):
        v = v.item()  # numpy scalar
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_plain)


class TableWriter:
    """Streams rows to CSV as they arrive, or collects them for one JSON document.

    CSV output starts with ``#``-prefixed lines echoing the run configuration,
    then the header row.  Extra sections (e.g. critical points) are appended as
    ``# name = {json}`` lines.
    """

    def __init__(self, stream: IO[str], columns: Sequence[str], fmt: str = "csv",
                 metadata: dict | None = None):
        if fmt not in ("csv", "json"):
            raise ValueError(f"unknown format {fmt!r}")
        self.stream = stream
        self.columns = list(columns)
        self.fmt = fmt
        self.metadata = metadata or {}
        self.rows: list[list] = []
        self.extra: dict = {}
        if fmt == "csv":
            for key in sorted(self.metadata):
                stream.write(f"# {key} = {dumps_canonical(self.metadata[key])}\n")
            self._csv = csv.writer(stream, lineterminator="\n")
            self._csv.writerow(self.columns)

    def write(self, row: Iterable):
        row = [_plain(v) for v in row]
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} fields, expected {len(self.columns)}")
        if self.fmt == "csv":
            self._csv.writerow([repr(v) if isinstance(v, float) else v for v in row])
            self.stream.flush()
        else:
            self.rows.append(row)

    def add_section(self, name: str, payload):
        self.extra[name] = payload

    def close(self):
        if self.fmt == "csv":
            for name, payload in self.extra.items():
                self.stream.write(f"# {name} = {dumps_canonical(payload)}\n")
        else:
            doc = {"metadata": self.metadata, "columns": self.columns, "rows": self.rows}
            doc.update(self.extra)
            self.stream.write(json.dumps(doc, indent=2, sort_keys=True, default=_plain) + "\n")
        self.stream.flush()


def read_table(path: str):
    """Inverse of :class:`TableWriter` for CSV files: ``(metadata, columns, rows)``."""
    meta, lines = {}, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, val = line[2:].partition(" = ")
                meta[key.strip()] = json.loads(val)
            else:
                lines.append(line)
    reader = csv.reader(lines)
    columns = next(reader)
    return meta, columns, [row for row in reader]
