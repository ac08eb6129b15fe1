"""Self-contained SVG line and scatter plots.

Just enough plotting for the command-line reports: one axes box, ticks,
polyline or point series, a legend, and an optional unit-diagonal
reference.  Output is deterministic text with no external resources.
"""

from __future__ import annotations

import numpy as np

__all__ = ["svg_plot"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_MARGIN_L = 64.0
_MARGIN_R = 16.0
_MARGIN_T = 38.0
_MARGIN_B = 50.0


def _extent(values, pad=0.05):
    lo = float(min(values))
    hi = float(max(values))
    if hi == lo:
        lo -= 0.5
        hi += 0.5
    span = hi - lo
    return lo - pad * span, hi + pad * span


def _ticks(lo, hi, count=5):
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def svg_plot(series, *, title="", xlabel="", ylabel="", diagonal=False,
             width=720, height=520) -> str:
    """Render series to an SVG string.

    Each series is a dict with keys ``label``, ``x``, ``y`` and an optional
    ``kind`` of "line" (default) or "points".  With diagonal=True the line
    y=x is drawn across the shared data range for reference.
    """
    series = list(series)
    if not series:
        raise ValueError("need at least one series")
    all_x = np.concatenate([np.asarray(s["x"], dtype=float) for s in series])
    all_y = np.concatenate([np.asarray(s["y"], dtype=float) for s in series])
    if not (np.isfinite(all_x).all() and np.isfinite(all_y).all()):
        raise ValueError("series values must be finite")
    xlo, xhi = _extent(all_x)
    ylo, yhi = _extent(all_y)
    if diagonal:
        lo = min(xlo, ylo)
        hi = max(xhi, yhi)
        xlo = ylo = lo
        xhi = yhi = hi

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B

    def px(x):
        return _MARGIN_L + (x - xlo) / (xhi - xlo) * plot_w

    def py(y):
        return _MARGIN_T + (yhi - y) / (yhi - ylo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{_MARGIN_L:.2f}" y="{_MARGIN_T:.2f}" width="{plot_w:.2f}" '
        f'height="{plot_h:.2f}" fill="none" stroke="#333" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.2f}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{title}</text>'
        )
    for tx in _ticks(xlo, xhi):
        x = px(tx)
        parts.append(
            f'<line x1="{x:.2f}" y1="{_MARGIN_T + plot_h:.2f}" x2="{x:.2f}" '
            f'y2="{_MARGIN_T + plot_h + 5:.2f}" stroke="#333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{_MARGIN_T + plot_h + 20:.2f}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">'
            f"{tx:.4g}</text>"
        )
    for ty in _ticks(ylo, yhi):
        y = py(ty)
        parts.append(
            f'<line x1="{_MARGIN_L - 5:.2f}" y1="{y:.2f}" x2="{_MARGIN_L:.2f}" '
            f'y2="{y:.2f}" stroke="#333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_L - 9:.2f}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{ty:.4g}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{_MARGIN_L + plot_w / 2:.2f}" y="{height - 12:.2f}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="13">'
            f"{xlabel}</text>"
        )
    if ylabel:
        x = 16.0
        y = _MARGIN_T + plot_h / 2
        parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" '
            f'transform="rotate(-90 {x:.2f} {y:.2f})">{ylabel}</text>'
        )
    if diagonal:
        parts.append(
            f'<line x1="{px(xlo):.2f}" y1="{py(xlo):.2f}" x2="{px(xhi):.2f}" '
            f'y2="{py(xhi):.2f}" stroke="#999" stroke-width="1" '
            f'stroke-dasharray="5,4"/>'
        )
    for k, s in enumerate(series):
        color = s.get("color", _COLORS[k % len(_COLORS)])
        xs = np.asarray(s["x"], dtype=float)
        ys = np.asarray(s["y"], dtype=float)
        if s.get("kind", "line") == "points":
            for xv, yv in zip(xs, ys):
                parts.append(
                    f'<circle cx="{px(xv):.2f}" cy="{py(yv):.2f}" r="3.5" '
                    f'fill="{color}" fill-opacity="0.8"/>'
                )
        else:
            pts = " ".join(f"{px(xv):.2f},{py(yv):.2f}" for xv, yv in zip(xs, ys))
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1.8"/>'
            )
        ly = _MARGIN_T + 16 + 18 * k
        lx = _MARGIN_L + plot_w - 140
        parts.append(
            f'<line x1="{lx:.2f}" y1="{ly - 4:.2f}" x2="{lx + 22:.2f}" '
            f'y2="{ly - 4:.2f}" stroke="{color}" stroke-width="2.5"/>'
        )
        parts.append(
            f'<text x="{lx + 28:.2f}" y="{ly:.2f}" font-family="sans-serif" '
            f'font-size="12">{s["label"]}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
