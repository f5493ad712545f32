"""Minimal self-contained SVG bar charts (no plotting dependency)."""

from __future__ import annotations

from xml.sax.saxutils import escape

__all__ = ["bar_chart"]

_WIDTH = 640
_HEIGHT = 400
_MARGIN = 48


def bar_chart(labels, values, path, title: str = "",
              color: str = "#4878a8") -> None:
    """Write a vertical bar chart; bars are emitted only for nonzero values."""
    labels = [str(l) for l in labels]
    values = [float(v) for v in values]
    if len(labels) != len(values):
        raise ValueError("labels and values lengths differ")
    if not values:
        raise ValueError("nothing to plot")
    vmax = max(max(values), 1e-12)
    plot_w = _WIDTH - 2 * _MARGIN
    plot_h = _HEIGHT - 2 * _MARGIN
    n = len(values)
    slot = plot_w / n
    bar_w = max(slot * 0.8, 0.5)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<text x="{_WIDTH / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{escape(title)}</text>',
        # axes
        f'<line x1="{_MARGIN}" y1="{_HEIGHT - _MARGIN}" x2="{_WIDTH - _MARGIN}" '
        f'y2="{_HEIGHT - _MARGIN}" stroke="#333"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{_HEIGHT - _MARGIN}" stroke="#333"/>',
        f'<text x="{_MARGIN - 6}" y="{_MARGIN + 4}" text-anchor="end" '
        f'font-family="sans-serif" font-size="10">{vmax:.4g}</text>',
    ]
    for i, value in enumerate(values):
        if value == 0.0:
            continue
        h = plot_h * value / vmax
        x = _MARGIN + i * slot + (slot - bar_w) / 2
        y = _HEIGHT - _MARGIN - h
        parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" '
                     f'height="{h:.2f}" fill="{color}"/>')
    # sparse x labels so long histograms stay readable
    step = max(1, n // 8)
    for i in range(0, n, step):
        x = _MARGIN + i * slot + slot / 2
        parts.append(f'<text x="{x:.1f}" y="{_HEIGHT - _MARGIN + 16}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="10">{escape(labels[i])}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
