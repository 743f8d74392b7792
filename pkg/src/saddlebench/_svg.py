"""Minimal self-contained log-log SVG charts (no plotting dependency)."""

from __future__ import annotations

import math

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 30, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo, hi):
    first = math.ceil(lo - 1e-9)
    last = math.floor(hi + 1e-9)
    return [float(k) for k in range(first, last + 1)]


def loglog_svg(series: dict, title: str = "", xlabel: str = "t",
               ylabel: str = "value") -> str:
    """Render named (t, v) series with positive entries on log-log axes."""
    pts = {
        name: [(math.log10(t), math.log10(v)) for t, v in vals if t > 0 and v > 0]
        for name, vals in series.items()
    }
    pts = {name: p for name, p in pts.items() if len(p) >= 2}
    if not pts:
        raise ValueError("nothing positive to plot")
    xs = [x for p in pts.values() for x, _ in p]
    ys = [y for p in pts.values() for _, y in p]
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(ys), max(ys)
    if xhi - xlo < 1e-9:
        xhi = xlo + 1.0
    if yhi - ylo < 1e-9:
        yhi = ylo + 1.0

    def sx(x):
        return _ML + (x - xlo) / (xhi - xlo) * (_W - _ML - _MR)

    def sy(y):
        return _H - _MB - (y - ylo) / (yhi - ylo) * (_H - _MT - _MB)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="monospace" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="18" text-anchor="middle">{title}</text>',
    ]
    axis = f'stroke="#333" stroke-width="1"'
    out.append(f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" '
               f'y2="{_H - _MB}" {axis}/>')
    out.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" {axis}/>')
    for tx in _ticks(xlo, xhi):
        out.append(f'<line x1="{sx(tx)}" y1="{_H - _MB}" x2="{sx(tx)}" '
                   f'y2="{_H - _MB + 5}" {axis}/>')
        out.append(f'<text x="{sx(tx)}" y="{_H - _MB + 18}" '
                   f'text-anchor="middle">1e{int(tx)}</text>')
    for ty in _ticks(ylo, yhi):
        out.append(f'<line x1="{_ML - 5}" y1="{sy(ty)}" x2="{_ML}" '
                   f'y2="{sy(ty)}" {axis}/>')
        out.append(f'<text x="{_ML - 8}" y="{sy(ty) + 4}" '
                   f'text-anchor="end">1e{int(ty)}</text>')
    out.append(f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 12}" '
               f'text-anchor="middle">log10 {xlabel}</text>')
    out.append(f'<text x="16" y="{(_MT + _H - _MB) / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2})">'
               f'log10 {ylabel}</text>')
    for i, (name, p) in enumerate(pts.items()):
        color = _COLORS[i % len(_COLORS)]
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in p)
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        out.append(f'<text x="{_W - _MR - 4}" y="{_MT + 16 + 16 * i}" '
                   f'text-anchor="end" fill="{color}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
