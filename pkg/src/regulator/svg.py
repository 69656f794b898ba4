"""Minimal SVG scatter and line plots written without plotting libraries."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

W, H = 640, 420
PAD_L, PAD_R, PAD_T, PAD_B = 70, 20, 30, 50
PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#7f7f7f")


def _range(vals, log=False):
    v = np.asarray(vals, dtype=float)
    v = v[np.isfinite(v)]
    if log:
        v = np.log10(v[v > 0]) if np.any(v > 0) else np.zeros(1)
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


class _Axes:
    def __init__(self, xr, yr, ylog=False):
        self.xr, self.yr, self.ylog = xr, yr, ylog

    def x(self, v):
        return PAD_L + (v - self.xr[0]) / (self.xr[1] - self.xr[0]) * (W - PAD_L - PAD_R)

    def y(self, v):
        if self.ylog:
            v = np.log10(np.maximum(v, 1e-300))
        return H - PAD_B - (v - self.yr[0]) / (self.yr[1] - self.yr[0]) * (H - PAD_T - PAD_B)


def _frame(ax: _Axes, title, xlabel, ylabel):
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<rect x="{PAD_L}" y="{PAD_T}" width="{W - PAD_L - PAD_R}" '
           f'height="{H - PAD_T - PAD_B}" fill="none" stroke="black"/>',
           f'<text x="{W / 2}" y="18" text-anchor="middle">{escape(title)}</text>',
           f'<text x="{W / 2}" y="{H - 10}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="16" y="{H / 2}" text-anchor="middle" '
           f'transform="rotate(-90 16 {H / 2})">{escape(ylabel)}</text>']
    for v in np.linspace(*ax.xr, 5):
        out.append(f'<text x="{ax.x(v):.1f}" y="{H - PAD_B + 16}" text-anchor="middle">{v:.3g}</text>')
    for v in np.linspace(*ax.yr, 5):
        label = f"1e{v:.1f}" if ax.ylog else f"{v:.3g}"
        yy = H - PAD_B - (v - ax.yr[0]) / (ax.yr[1] - ax.yr[0]) * (H - PAD_T - PAD_B)
        out.append(f'<text x="{PAD_L - 6}" y="{yy + 4:.1f}" text-anchor="end">{label}</text>')
    return out


def _legend(labels):
    out = []
    for i, lab in enumerate(labels):
        y = PAD_T + 14 + 16 * i
        c = PALETTE[i % len(PALETTE)]
        out.append(f'<rect x="{W - PAD_R - 110}" y="{y - 8}" width="10" height="10" fill="{c}"/>')
        out.append(f'<text x="{W - PAD_R - 95}" y="{y + 1}">{escape(str(lab))}</text>')
    return out


def scatter(series: dict, title="", xlabel="Re", ylabel="Im") -> str:
    """Scatter plot of complex points, one color per series."""
    allpts = np.concatenate([np.asarray(v, dtype=complex) for v in series.values()] or [np.zeros(0)])
    ax = _Axes(_range(allpts.real), _range(allpts.imag))
    out = _frame(ax, title, xlabel, ylabel)
    for i, (lab, pts) in enumerate(series.items()):
        c = PALETTE[i % len(PALETTE)]
        for z in np.asarray(pts, dtype=complex):
            if np.isfinite(z):
                out.append(f'<circle cx="{ax.x(z.real):.1f}" cy="{ax.y(z.imag):.1f}" r="2.5" '
                           f'fill="none" stroke="{c}"/>')
    out += _legend(series.keys()) + ["</svg>"]
    return "\n".join(out)


def lines(x, series: dict, title="", xlabel="t", ylabel="", ylog=False, markers=False) -> str:
    """Line plot of several series sharing the abscissa ``x``."""
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    allv = np.concatenate(list(ys.values()) or [np.zeros(1)])
    ax = _Axes(_range(x), _range(allv, log=ylog), ylog=ylog)
    out = _frame(ax, title, xlabel, ylabel)
    stride = max(1, len(x) // 2000)
    for i, (lab, y) in enumerate(ys.items()):
        c = PALETTE[i % len(PALETTE)]
        ok = np.isfinite(y) & ((y > 0) if ylog else True)
        pts = " ".join(f"{ax.x(a):.1f},{ax.y(b):.1f}"
                       for a, b in zip(x[ok][::stride], y[ok][::stride]))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="1.2"/>')
        if markers:
            out += [f'<circle cx="{ax.x(a):.1f}" cy="{ax.y(b):.1f}" r="2" fill="{c}"/>'
                    for a, b in zip(x[ok], y[ok])]
    out += _legend(ys.keys()) + ["</svg>"]
    return "\n".join(out)
