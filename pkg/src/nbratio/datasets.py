"""Dataset file ingestion and species presets.

CSV dialect: comma-separated, UTF-8, header row required.  Pre-treatment
replicate columns are named ``pre`` or ``pre1..preM``, post-treatment ones
``post`` or ``post1..postM``; an ``id`` column is optional.  Replicates
are summed per subject before analysis.  JSON files carry ``pre``/``post``
arrays (flat, or nested per-subject replicate lists) plus a ``paired``
flag.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InconsistentReplicatesError, ParseError
from .estimators import PairedDataset, pool_replicates


@dataclass(frozen=True)
class SpeciesPreset:
    name: str
    target_efficacy: float
    default_margin: float
    mu1: float
    k1: float
    k2: float
    correlation: float


SPECIES_PRESETS = (
    SpeciesPreset("hookworm", 0.70, 0.05, 74.0, 0.84, 0.58, 0.65),
    SpeciesPreset("ascaris", 0.95, 0.05, 1255.0, 0.08, 0.0512, 0.67),
    SpeciesPreset("trichuris", 0.50, 0.05, 162.0, 0.92, 0.53, 0.68),
)


def species_preset(name: str) -> SpeciesPreset:
    for preset in SPECIES_PRESETS:
        if preset.name == name.lower():
            return preset
    raise ParseError(
        f"unknown preset {name!r}; expected one of {[p.name for p in SPECIES_PRESETS]}"
    )


def _parse_count(token: str, row: int, column: str) -> int:
    text = token.strip()
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"row {row}, column {column!r}: {token!r} is not a number") from None
    if not math.isfinite(value) or value != int(value):
        raise ParseError(f"row {row}, column {column!r}: {token!r} is not an integer count")
    if value < 0:
        raise ParseError(f"row {row}, column {column!r}: counts must be non-negative")
    return int(value)


def _group_columns(header: list[str], prefix: str) -> list[int]:
    indices = [i for i, name in enumerate(header) if name.strip().lower().startswith(prefix)]
    if not indices:
        raise ParseError(f"no {prefix!r} columns found in header {header}")
    return indices


def _read_csv_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if any(cell.strip() for cell in row)]
    if not rows:
        raise ParseError(f"{path}: empty file")
    return rows[0], rows[1:]


def ingest_csv(path: str | Path, paired: bool = True) -> PairedDataset:
    path = Path(path)
    header, rows = _read_csv_rows(path)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    pre_cols = _group_columns(header, "pre")
    post_cols = _group_columns(header, "post")

    pre_rows: list[list[int]] = []
    post_rows: list[list[int]] = []
    for row_idx, row in enumerate(rows, start=2):
        if len(row) < len(header):
            row = row + [""] * (len(header) - len(row))
        pre_cells = [row[i].strip() for i in pre_cols]
        post_cells = [row[i].strip() for i in post_cols]
        pre_full, pre_empty = all(pre_cells), not any(pre_cells)
        post_full, post_empty = all(post_cells), not any(post_cells)
        if not (pre_full or pre_empty) or not (post_full or post_empty):
            raise InconsistentReplicatesError(
                f"row {row_idx}: partially filled replicate group"
            )
        if paired and not (pre_full and post_full):
            raise ParseError(f"row {row_idx}: paired data requires every cell filled")
        if pre_full:
            pre_rows.append(
                [_parse_count(row[i], row_idx, header[i]) for i in pre_cols]
            )
        if post_full:
            post_rows.append(
                [_parse_count(row[i], row_idx, header[i]) for i in post_cols]
            )
    if not pre_rows or not post_rows:
        raise ParseError(f"{path}: one of the groups has no complete rows")
    pre, m_pre = pool_replicates(pre_rows)
    post, m_post = pool_replicates(post_rows)
    return PairedDataset(pre, post, paired=paired, m_pre=m_pre, m_post=m_post)


def _json_group(raw, name: str) -> tuple[np.ndarray, int]:
    if not isinstance(raw, list) or not raw:
        raise ParseError(f"{name!r} must be a non-empty array")
    if all(isinstance(v, list) for v in raw):
        return pool_replicates(raw)
    if any(isinstance(v, list) for v in raw):
        raise ParseError(f"{name!r} mixes scalars and replicate lists")
    sums, m = pool_replicates([[v] for v in raw])
    return sums, m


def ingest_json(path: str | Path, paired: bool | None = None) -> PairedDataset:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(payload, dict) or "pre" not in payload or "post" not in payload:
        raise ParseError(f"{path}: expected an object with 'pre' and 'post' arrays")
    try:
        pre, m_pre = _json_group(payload["pre"], "pre")
        post, m_post = _json_group(payload["post"], "post")
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    if paired is None:
        paired = bool(payload.get("paired", True))
    return PairedDataset(pre, post, paired=paired, m_pre=m_pre, m_post=m_post)


def ingest(path: str | Path, fmt: str | None = None, paired: bool = True) -> PairedDataset:
    path = Path(path)
    if fmt is None:
        fmt = "json" if path.suffix.lower() == ".json" else "csv"
    if fmt == "csv":
        return ingest_csv(path, paired=paired)
    if fmt == "json":
        return ingest_json(path, paired=paired)
    raise ParseError(f"unknown dataset format {fmt!r}; expected csv or json")
