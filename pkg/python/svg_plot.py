"""
Two-panel SVG line plots: raw values on top, log10 values below.
Missing points break the polyline. Output text is deterministic.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

logger = logging.getLogger(__name__)

Point = Tuple[int, Optional[float]]

WIDTH = 900
PANEL_HEIGHT = 300
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 40
PANEL_GAP = 50
TICKS = 5


def _usable(value: Optional[float]) -> bool:
    return value is not None and math.isfinite(value)


def _segments(points: Sequence[Point]) -> List[List[Tuple[int, float]]]:
    segments: List[List[Tuple[int, float]]] = [[]]
    for n, value in points:
        if _usable(value):
            segments[-1].append((n, value))
        elif segments[-1]:
            segments.append([])
    return [s for s in segments if s]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _panel(points: Sequence[Point], top: float, label: str,
           marks: Sequence[int] = ()) -> List[str]:
    height = PANEL_HEIGHT
    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    bottom = top + height
    out = [f'<rect x="{left}" y="{_fmt(top)}" width="{right - left}" height="{height}" '
           f'fill="none" stroke="#999"/>',
           f'<text x="{left}" y="{_fmt(top - 8)}" font-size="13">{escape(label)}</text>']

    good = [(n, v) for n, v in points if _usable(v)]
    if not good:
        out.append(f'<text x="{left + 10}" y="{_fmt(top + 20)}" font-size="12">no data</text>')
        return out

    n_lo = min(n for n, _ in points)
    n_hi = max(n for n, _ in points)
    v_lo = min(v for _, v in good)
    v_hi = max(v for _, v in good)
    if v_hi == v_lo:
        v_lo, v_hi = v_lo - 1, v_hi + 1
    span_n = max(n_hi - n_lo, 1)

    def sx(n: float) -> float:
        return left + (n - n_lo) / span_n * (right - left)

    def sy(v: float) -> float:
        return bottom - (v - v_lo) / (v_hi - v_lo) * height

    for i in range(TICKS + 1):
        v = v_lo + (v_hi - v_lo) * i / TICKS
        out.append(f'<text x="{left - 6}" y="{_fmt(sy(v) + 4)}" font-size="10" '
                   f'text-anchor="end">{v:.3g}</text>')
        n = n_lo + span_n * i / TICKS
        out.append(f'<text x="{_fmt(sx(n))}" y="{_fmt(bottom + 14)}" font-size="10" '
                   f'text-anchor="middle">{n:.0f}</text>')

    for segment in _segments(points):
        coords = " ".join(f"{_fmt(sx(n))},{_fmt(sy(v))}" for n, v in segment)
        out.append(f'<polyline fill="none" stroke="#1f4e9c" stroke-width="1.2" points="{coords}"/>')

    lookup = dict(good)
    for n in marks:
        if n in lookup:
            out.append(f'<circle cx="{_fmt(sx(n))}" cy="{_fmt(sy(lookup[n]))}" r="2.5" fill="#c0392b"/>')
    return out


def two_panel_svg(title: str, raw: Sequence[Point], logs: Sequence[Point],
                  envelope: Sequence[int] = ()) -> str:
    """Raw series above, log10 series below; envelope abscissas marked on the log panel"""
    height = MARGIN_TOP + 2 * PANEL_HEIGHT + PANEL_GAP + 40
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">',
        f'<text x="{WIDTH / 2:.0f}" y="20" font-size="15" text-anchor="middle">{escape(title)}</text>',
    ]
    lines += _panel(raw, MARGIN_TOP, "minimum modulus")
    lines += _panel(logs, MARGIN_TOP + PANEL_HEIGHT + PANEL_GAP, "log10 minimum modulus", envelope)
    lines.append("</svg>")
    gaps = sum(1 for _, v in raw if not _usable(v))
    if gaps:
        logger.warning(f"⚠️ plot '{title}' drawn with {gaps} missing points")
    return "\n".join(lines) + "\n"
