"""Static SVG score-curve plots.

The SVG is assembled by hand with fixed-precision coordinates so identical
inputs always produce byte-identical files (no renderer metadata, no
timestamps).
"""

from __future__ import annotations

from pathlib import Path

from .pipeline import VideoAnalysis
from .scores import ScoreSeries

WIDTH = 840
HEIGHT = 260
MARGIN_LEFT = 48
MARGIN_RIGHT = 16
MARGIN_TOP = 18
MARGIN_BOTTOM = 30

PLOT_W = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
PLOT_H = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

FINAL_COLOR = "#c0392b"
FIRST_PASS_COLOR = "#7f8c8d"
INTERVAL_COLOR = "#f5b7b1"
BAND_COLOR = "#2980b9"


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _x(frame: float, total_frames: int) -> float:
    if total_frames <= 1:
        return MARGIN_LEFT + PLOT_W / 2.0
    return MARGIN_LEFT + (frame - 1.0) / (total_frames - 1.0) * PLOT_W


def _y(score: float) -> float:
    return MARGIN_TOP + (1.0 - score) * PLOT_H


def _polyline(series: ScoreSeries, color: str, dasharray: str | None = None) -> str:
    points = " ".join(
        f"{_fmt(_x(frame, series.total_frames))},{_fmt(_y(value))}"
        for frame, value in zip(series.center_frames(), series.values)
    )
    dash = f' stroke-dasharray="{dasharray}"' if dasharray else ""
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{points}" />'
    )


def render_score_plot(
    analysis: VideoAnalysis,
    intervals: list[tuple[int, int]] | None,
    out_path: str | Path,
    include_first_pass: bool = True,
) -> Path:
    """Write the score curve, ground-truth shading, and gate band to an SVG file."""
    total = analysis.final_scores.total_frames
    parts: list[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff" />',
    ]
    for start, end in intervals or []:
        x0 = _x(start, total)
        x1 = _x(end, total)
        parts.append(
            f'<rect x="{_fmt(x0)}" y="{MARGIN_TOP}" width="{_fmt(max(x1 - x0, 1.0))}" '
            f'height="{PLOT_H}" fill="{INTERVAL_COLOR}" />'
        )
    # frame for the plot area
    parts.append(
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{PLOT_W}" height="{PLOT_H}" '
        f'fill="none" stroke="#333333" stroke-width="1" />'
    )
    # gate band guides around the decision boundary
    boundary = analysis.gate.boundary
    margin = analysis.gate.margin
    for level in (boundary - margin, boundary + margin):
        y = _fmt(_y(level))
        parts.append(
            f'<line x1="{MARGIN_LEFT}" y1="{y}" x2="{MARGIN_LEFT + PLOT_W}" y2="{y}" '
            f'stroke="{BAND_COLOR}" stroke-width="1" stroke-dasharray="4,3" />'
        )
    if include_first_pass and analysis.refined is not None:
        parts.append(_polyline(analysis.first_pass, FIRST_PASS_COLOR, dasharray="2,2"))
    parts.append(_polyline(analysis.final_scores, FINAL_COLOR))
    for level, label in ((0.0, "0"), (0.5, "0.5"), (1.0, "1")):
        y = _fmt(_y(level) + 4)
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{y}" font-family="monospace" font-size="11" '
            f'text-anchor="end" fill="#333333">{label}</text>'
        )
    parts.append(
        f'<text x="{MARGIN_LEFT}" y="{HEIGHT - 10}" font-family="monospace" font-size="11" '
        f'fill="#333333">{analysis.video_id} (frames 1..{total})</text>'
    )
    parts.append("</svg>")
    path = Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return path
