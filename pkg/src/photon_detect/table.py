"""CSV result tables with ``#`` provenance lines."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple[float, ...]] = field(default_factory=list)
    provenance: dict[str, str] = field(default_factory=dict)
    footer: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.rows = [tuple(float(v) for v in row) for row in self.rows]
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row of length {len(row)} in a table with {len(self.columns)} columns")

    def column(self, name: str) -> list[float]:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def fmt(value: float) -> str:
    """17 significant digits: enough for an exact float round trip."""
    return format(float(value), ".17g")


def provenance_for(experiment: str, digest: str, echo: dict, timestamp: str | None) -> dict[str, str]:
    prov = {"tool": f"photon-detect {__version__}", "experiment": experiment, "config_sha256": digest,
            "config": json.dumps(echo, sort_keys=True, separators=(",", ":"))}
    if timestamp is not None:
        prov["generated"] = timestamp
    return prov


def render_table(table: ResultTable) -> str:
    buf = io.StringIO()
    for key, value in table.provenance.items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([fmt(v) for v in row])
    for key, value in table.footer.items():
        buf.write(f"# {key}={fmt(value)}\n")
    return buf.getvalue()


def write_table(table: ResultTable, path: str | Path) -> None:
    Path(path).write_text(render_table(table))


def parse_table(text: str) -> ResultTable:
    provenance: dict[str, str] = {}
    footer: dict[str, float] = {}
    body: list[str] = []
    for line in text.splitlines():
        if line.startswith("# "):
            entry = line[2:]
            if ": " in entry and (not body):
                key, value = entry.split(": ", 1)
                provenance[key] = value
            elif "=" in entry:
                key, value = entry.split("=", 1)
                footer[key] = float(value)
        elif line:
            body.append(line)
    if not body:
        raise ValueError("table has no header row")
    reader = csv.reader(body)
    columns = next(reader)
    rows: Sequence = [tuple(float(v) for v in r) for r in reader]
    return ResultTable(columns, list(rows), provenance, footer)


def read_table(path: str | Path) -> ResultTable:
    return parse_table(Path(path).read_text())
