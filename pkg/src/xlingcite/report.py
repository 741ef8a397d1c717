"""Deterministic CSV, JSONL and SVG writers."""

from __future__ import annotations

import csv
import json
import os
from typing import Iterable, Optional, Sequence
from xml.sax.saxutils import escape

from .usage import GeoMatrix


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def emit_csv(rows: Sequence[dict], path: str, columns: Optional[Sequence[str]] = None) -> None:
    """Write rows as UTF-8 CSV with a header and LF line endings.

    Row order is the caller's; every producer in this package sorts its rows
    before handing them over. With no rows, ``columns`` still yields a header.
    """
    if columns is None:
        if not rows:
            raise ValueError(f"{path}: no rows and no columns")
        columns = list(rows[0])
    for row in rows:
        if list(row) != list(columns):
            raise ValueError(f"{path}: row keys {list(row)} differ from header {list(columns)}")
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(row[c] for c in columns)


def emit_jsonl(objs: Iterable[dict], path: str) -> int:
    _ensure_parent(path)
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
            n += 1
    return n


def matrix_rows(matrix: GeoMatrix, mode: str = "abs") -> tuple[list[dict], list[str]]:
    rows, cols, values = matrix.table(mode)
    out = []
    for r, vals in zip(rows, values):
        row = {"cited_language": r}
        for c, v in zip(cols, vals):
            row[c] = str(int(v)) if mode == "abs" else f"{v:.6f}"
        out.append(row)
    return out, ["cited_language", *cols]


CELL = 36
LABEL = 48
MAX_ANNOTATED_COLUMNS = 20


def _fmt_cell(v: float, mode: str) -> str:
    return str(int(v)) if mode == "abs" else f"{v:.2f}"


def heatmap_svg(matrix: GeoMatrix, mode: str = "abs") -> str:
    """Render a grayscale heatmap: darker cells hold larger values.

    ``abs`` scales by the largest cell, ``rel`` shows row-normalized shares.
    """
    if mode not in ("abs", "rel"):
        raise ValueError(f"unknown mode {mode!r}")
    rows, cols, values = matrix.table(mode)
    if not rows or not cols:
        raise ValueError("heatmap needs a non-empty matrix")
    peak = max(max(r) for r in values) if mode == "abs" else 1.0
    width = LABEL + CELL * len(cols)
    height = LABEL + CELL * len(rows)
    annotate = len(cols) <= MAX_ANNOTATED_COLUMNS
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
    ]
    for j, c in enumerate(cols):
        x = LABEL + CELL * j + CELL // 2
        out.append(f'<text class="col-label" x="{x}" y="{LABEL - 8}" text-anchor="middle">{escape(c)}</text>')
    for i, r in enumerate(rows):
        y = LABEL + CELL * i
        out.append(
            f'<text class="row-label" x="{LABEL - 6}" y="{y + CELL // 2 + 4}" text-anchor="end">{escape(r)}</text>'
        )
        for j, v in enumerate(values[i]):
            x = LABEL + CELL * j
            intensity = v / peak if peak else 0.0
            level = round(255 * (1 - intensity))
            fill = f"#{level:02x}{level:02x}{level:02x}"
            out.append(
                f'<rect class="cell" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}">'
                f"<title>{escape(r)} / {escape(cols[j])}: {_fmt_cell(v, mode)}</title></rect>"
            )
            if annotate:
                ink = "#ffffff" if intensity > 0.5 else "#000000"
                out.append(
                    f'<text class="value" x="{x + CELL // 2}" y="{y + CELL // 2 + 4}" '
                    f'text-anchor="middle" fill="{ink}">{_fmt_cell(v, mode)}</text>'
                )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_heatmap_svg(matrix: GeoMatrix, path: str, mode: str = "abs") -> None:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(heatmap_svg(matrix, mode))
