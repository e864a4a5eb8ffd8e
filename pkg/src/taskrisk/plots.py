"""Deterministic SVG rendering for the scree and k-scan figures.

The SVG is assembled from plain strings with fixed-precision coordinates,
so identical input tables produce byte-identical files, which makes the
plots golden-file testable.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import ParameterError

KINDS = ("scree", "silhouette_scan")

WIDTH, HEIGHT = 640.0, 420.0
MARGIN_LEFT, MARGIN_RIGHT = 70.0, 20.0
MARGIN_TOP, MARGIN_BOTTOM = 30.0, 50.0


def _f(v: float) -> str:
    return f"{v:.3f}"


class _Frame:
    """Maps data coordinates onto the fixed plot rectangle."""

    def __init__(self, xs, ys):
        self.x0, self.x1 = float(np.min(xs)), float(np.max(xs))
        self.y0, self.y1 = float(np.min(ys)), float(np.max(ys))
        if self.x1 == self.x0:
            self.x0, self.x1 = self.x0 - 0.5, self.x1 + 0.5
        if self.y1 == self.y0:
            self.y0, self.y1 = self.y0 - 0.5, self.y1 + 0.5
        pad = 0.05 * (self.y1 - self.y0)
        self.y0 -= pad
        self.y1 += pad

    def x(self, v: float) -> float:
        span = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
        return MARGIN_LEFT + (v - self.x0) / (self.x1 - self.x0) * span

    def y(self, v: float) -> float:
        span = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
        return HEIGHT - MARGIN_BOTTOM - (v - self.y0) / (self.y1 - self.y0) * span


def _header(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(WIDTH)}" '
        f'height="{_f(HEIGHT)}" viewBox="0 0 {_f(WIDTH)} {_f(HEIGHT)}">',
        f'<rect x="0" y="0" width="{_f(WIDTH)}" height="{_f(HEIGHT)}" fill="white"/>',
        f'<text x="{_f(WIDTH / 2)}" y="20" text-anchor="middle" '
        f'font-family="monospace" font-size="14">{escape(title)}</text>',
    ]


def _axes(frame: _Frame, x_label: str, y_label: str) -> list[str]:
    bx, by = frame.x(frame.x0), frame.y(frame.y0)
    tx, ty = frame.x(frame.x1), frame.y(frame.y1)
    parts = [
        f'<line x1="{_f(bx)}" y1="{_f(by)}" x2="{_f(tx)}" y2="{_f(by)}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{_f(bx)}" y1="{_f(by)}" x2="{_f(bx)}" y2="{_f(ty)}" '
        'stroke="black" stroke-width="1"/>',
        f'<text x="{_f((bx + tx) / 2)}" y="{_f(HEIGHT - 12)}" text-anchor="middle" '
        f'font-family="monospace" font-size="12">{escape(x_label)}</text>',
        f'<text x="16" y="{_f((by + ty) / 2)}" text-anchor="middle" '
        f'font-family="monospace" font-size="12" '
        f'transform="rotate(-90 16 {_f((by + ty) / 2)})">{escape(y_label)}</text>',
        f'<text x="{_f(bx)}" y="{_f(by + 16)}" text-anchor="middle" '
        f'font-family="monospace" font-size="10">{_f(frame.x0)}</text>',
        f'<text x="{_f(tx)}" y="{_f(by + 16)}" text-anchor="middle" '
        f'font-family="monospace" font-size="10">{_f(frame.x1)}</text>',
        f'<text x="{_f(bx - 6)}" y="{_f(by)}" text-anchor="end" '
        f'font-family="monospace" font-size="10">{_f(frame.y0)}</text>',
        f'<text x="{_f(bx - 6)}" y="{_f(ty + 4)}" text-anchor="end" '
        f'font-family="monospace" font-size="10">{_f(frame.y1)}</text>',
    ]
    return parts


def _polyline(frame: _Frame, xs, ys, color: str, dashed: bool = False) -> str:
    points = " ".join(f"{_f(frame.x(x))},{_f(frame.y(y))}" for x, y in zip(xs, ys))
    dash = ' stroke-dasharray="6,4"' if dashed else ""
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} '
        f'points="{points}"/>'
    )


def emit_plot(table, kind: str, path) -> None:
    """Render a numeric table to an SVG file.

    kind="scree": columns (rank, observed, reference), at least two rows;
    draws the two eigenvalue polylines. kind="silhouette_scan": columns
    (k, mean_silhouette[, cost]); draws one marker per k and annotates the
    maximum.
    """
    if kind not in KINDS:
        raise ParameterError(f"plot kind must be one of {KINDS}")
    data = np.asarray(table, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ParameterError("plot table must be a non-empty 2-D array")

    if kind == "scree":
        if data.shape[0] < 2:
            raise ParameterError("scree plot needs at least 2 ranks")
        if data.shape[1] < 3:
            raise ParameterError("scree table needs (rank, observed, reference)")
        ranks, observed, reference = data[:, 0], data[:, 1], data[:, 2]
        frame = _Frame(ranks, np.concatenate([observed, reference]))
        parts = _header("Parallel analysis scree")
        parts += _axes(frame, "component rank", "eigenvalue")
        parts.append(_polyline(frame, ranks, observed, "#1f4e9c"))
        parts.append(_polyline(frame, ranks, reference, "#c23b22", dashed=True))
        parts.append(
            f'<text x="{_f(WIDTH - MARGIN_RIGHT)}" y="{_f(MARGIN_TOP + 12)}" '
            'text-anchor="end" font-family="monospace" font-size="11" '
            'fill="#1f4e9c">observed</text>'
        )
        parts.append(
            f'<text x="{_f(WIDTH - MARGIN_RIGHT)}" y="{_f(MARGIN_TOP + 26)}" '
            'text-anchor="end" font-family="monospace" font-size="11" '
            'fill="#c23b22">reference</text>'
        )
    else:
        if data.shape[1] < 2:
            raise ParameterError("k-scan table needs (k, mean_silhouette)")
        ks, sil = data[:, 0], data[:, 1]
        frame = _Frame(ks, sil)
        parts = _header("Mean silhouette by cluster count")
        parts += _axes(frame, "k", "mean silhouette")
        if data.shape[0] > 1:
            parts.append(_polyline(frame, ks, sil, "#1f4e9c"))
        for x, y in zip(ks, sil):
            parts.append(
                f'<circle cx="{_f(frame.x(x))}" cy="{_f(frame.y(y))}" r="3.5" '
                'fill="#1f4e9c"/>'
            )
        best = int(np.argmax(sil))
        parts.append(
            f'<text x="{_f(frame.x(ks[best]))}" y="{_f(frame.y(sil[best]) - 8)}" '
            'text-anchor="middle" font-family="monospace" font-size="11" '
            f'fill="#c23b22">best k={int(ks[best])}</text>'
        )

    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
