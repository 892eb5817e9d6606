"""Deterministic file writers.

Every CSV is written twice: the primary file renders floats with 17
significant digits (full round-trip precision, byte-reproducible), and a
``*.rounded.csv`` sibling renders 6 significant digits for human reading.
JSON output is key-sorted with a trailing newline.
"""

from __future__ import annotations

import json
import os


def format_float(value, digits: int = 17) -> str:
    return f"%.{digits}g" % float(value)


def _render(value, digits: int) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value, digits)
    return str(value)


def rounded_path(path: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}.rounded{ext}"


def write_csv(path, header, rows, comment: str | None = None) -> None:
    """Write ``rows`` (iterables of cells) under ``header``, plus the rounded
    mirror file.  ``comment`` becomes a leading ``# ...`` metadata line."""
    rows = [list(r) for r in rows]
    for digits, target in ((17, path), (6, rounded_path(str(path)))):
        lines = []
        if comment:
            lines.append(f"# {comment}")
        lines.append(",".join(header))
        for row in rows:
            lines.append(",".join(_render(cell, digits) for cell in row))
        with open(target, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def write_json(path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(obj, sort_keys=True, indent=2))
        fh.write("\n")
