"""Deterministic JSON, CSV and SVG writers."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SVG_SIZE = 1000
SVG_MARGIN = 20


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False, default=_default) + "\n"


def _default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return repr(float(o))
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [repr(o.real), repr(o.imag)]
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def points_csv(points, labels: Sequence[str] | None = None) -> str:
    """Rows ``re,im,path``; coordinates use repr so they round-trip exactly."""
    z = np.asarray(points, dtype=complex).ravel()
    labels = labels if labels is not None else [""] * len(z)
    if len(labels) != len(z):
        raise ValueError("one label per point")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "path"])
    for p, lab in zip(z, labels):
        w.writerow([repr(float(p.real)), repr(float(p.imag)), lab])
    return buf.getvalue()


def write_points_csv(path: str | Path, points, labels: Sequence[str] | None = None) -> Path:
    path = Path(path)
    path.write_text(points_csv(points, labels))
    return path


def read_points_csv(path: str | Path) -> tuple[np.ndarray, list[str]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["re", "im", "path"]:
        raise ValueError("expected header re,im,path")
    z = np.array([complex(float(r[0]), float(r[1])) for r in rows[1:]], dtype=complex)
    return z, [r[2] for r in rows[1:]]


def _frame(points: np.ndarray, size: int, margin: int):
    lo = np.array([points.real.min(), points.imag.min()])
    hi = np.array([points.real.max(), points.imag.max()])
    span = float(max(hi - lo)) or 1.0
    scale = (size - 2 * margin) / span
    centre = (lo + hi) / 2

    def to_px(z):
        z = np.asarray(z, dtype=complex)
        x = size / 2 + (z.real - centre[0]) * scale
        y = size / 2 - (z.imag - centre[1]) * scale  # y grows downwards in SVG
        return x, y

    return to_px


def _header(size: int) -> list[str]:
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}">',
            f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>']


def svg_points(points, radius: float = 0.8, size: int = SVG_SIZE, margin: int = SVG_MARGIN,
               polylines: Iterable = ()) -> str:
    """Scatter plot of complex points, optionally with closed polylines on top."""
    z = np.asarray(points, dtype=complex).ravel()
    polylines = [np.asarray(p, dtype=complex) for p in polylines]
    allz = np.concatenate([z, *polylines]) if polylines else z
    if not len(allz):
        raise ValueError("nothing to draw")
    to_px = _frame(allz, size, margin)
    out = _header(size)
    x, y = to_px(z)
    out.append('<g fill="black" stroke="none">')
    out.extend(f'<circle cx="{a:.6f}" cy="{b:.6f}" r="{radius:.6f}"/>' for a, b in zip(x, y))
    out.append("</g>")
    for p in polylines:
        px, py = to_px(p)
        pts = " ".join(f"{a:.6f},{b:.6f}" for a, b in zip(px, py))
        out.append(f'<polyline fill="none" stroke="red" stroke-width="1.000000" points="{pts}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_intervals(rows: Sequence[tuple[int, float, float]], size: int = SVG_SIZE, margin: int = SVG_MARGIN) -> str:
    """Intervals of [0, 1) as bars; one row per interval, ordered by the first field."""
    rows = sorted(rows)
    out = _header(size)
    width = size - 2 * margin
    h = max((size - 2 * margin) / max(len(rows), 1), 0.5)
    out.append('<g fill="black" stroke="none">')
    for k, (_, lo, hi) in enumerate(rows):
        x = margin + lo * width
        w = max((hi - lo) * width, 0.5)
        y = margin + k * h
        out.append(f'<rect x="{x:.6f}" y="{y:.6f}" width="{w:.6f}" height="{h:.6f}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.write_text(text)
    return path
