"""CSV artifacts: fixed schemas and round-trip-safe float formatting."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SCHEMA_VERSION = 1

EVOLVE_COLUMNS = ("t", "regime", "r_x", "r_y", "r_z", "speed", "fidelity_to_initial")
DISTANCE_MAP_COLUMNS = ("eps", "t", "d_hs")
QSL_SCAN_COLUMNS = ("N", "qsl", "qsl_cl_closed", "qsl_cl_numeric", "ratio")
SWEEP_SUMMARY_COLUMNS = ("job", "command", "status", "outputs", "error")

MISSING = "n/a"


def format_float(x: float) -> str:
    """17 significant digits; scientific notation for ``|x| < 1e-4`` or ``|x| >= 1e6``."""
    x = float(x)
    if math.isnan(x):
        return MISSING
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0"
    ax = abs(x)
    if ax < 1e-4 or ax >= 1e6:
        return np.format_float_scientific(x, precision=16, unique=False, trim="-")
    return np.format_float_positional(x, precision=17, unique=False, fractional=False, trim="-")


def format_cell(v) -> str:
    if v is None:
        return MISSING
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format_float(v)


@dataclass(frozen=True)
class CsvArtifact:
    path: Path
    columns: tuple
    row_count: int


def render_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, columns: Sequence[str], rows: Sequence[Sequence]) -> CsvArtifact:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = render_csv(columns, rows)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return CsvArtifact(path, tuple(columns), len(rows))


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]
