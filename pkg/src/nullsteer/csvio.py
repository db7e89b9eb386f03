"""Deterministic CSV output.

Floats are printed with %.16e (17 significant digits) so repeated runs
are byte-identical and round-trip exactly; newline is always "\\n".
"""

from __future__ import annotations

FLOAT_FORMAT = "%.16e"


def format_value(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    if isinstance(value, complex):
        raise TypeError("split complex values into re/im columns")
    return str(value)


def write_csv(path, header, rows):
    """Write rows (iterables of cells) under a header tuple."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    """Read back a CSV written by write_csv: (header, list of string rows)."""
    with open(path, newline="") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = tuple(lines[0].split(","))
    return header, [ln.split(",") for ln in lines[1:]]
