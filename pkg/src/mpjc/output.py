"""Deterministic CSV tables with an embedded metadata block.

Files start with '#'-prefixed metadata lines (tool version plus the full
resolved run configuration as one JSON line), then a header row and numeric
rows.  Floats are written with 17 significant digits so values round-trip
losslessly; nothing time- or host-dependent is written, so re-running a
command reproduces files byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__


def format_value(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


@dataclass
class OutputTable:
    """A rectangular numeric table plus its provenance metadata."""

    header: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.header)) != len(self.header):
            raise ValueError("header names must be unique")
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValueError("rows must match the header width")

    def column(self, name: str) -> list:
        idx = self.header.index(name)
        return [row[idx] for row in self.rows]

    def render(self) -> str:
        lines = [f"# generator: mpjc {__version__}"]
        for key in sorted(self.metadata):
            value = self.metadata[key]
            if not isinstance(value, str):
                value = json.dumps(value, sort_keys=True, separators=(",", ":"))
            lines.append(f"# {key}: {value}")
        lines.append(",".join(str(h) for h in self.header))
        for row in self.rows:
            lines.append(",".join(format_value(v) for v in row))
        return "\n".join(lines) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(), encoding="utf-8", newline="\n")
        return path
