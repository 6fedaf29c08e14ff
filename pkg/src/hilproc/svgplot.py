"""Self-contained SVG rendering of the rate study (no plotting dependency).

One chart: measured distance vs horizon on log-log axes, the Monte Carlo
noise floor as a shaded band, and the assembled theoretical bound as a
curve.  Output is a deterministic function of the data.
"""

from __future__ import annotations

import math

__all__ = ["rates_svg", "write_rates_svg"]

_W, _H = 640, 460
_ML, _MR, _MT, _MB = 70, 20, 24, 46


def _log_ticks(lo, hi):
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    return [10.0**e for e in range(lo_e, hi_e + 1) if lo <= 10.0**e <= hi]


def _fmt_pow10(v):
    e = round(math.log10(v))
    if abs(v - 10.0**e) < 1e-9 * v:
        return f"1e{e}" if e < -1 or e > 3 else f"{10.0 ** e:g}"
    return f"{v:g}"


class _LogAxes:
    def __init__(self, xs, ys):
        self.x0, self.x1 = min(xs), max(xs)
        self.y0, self.y1 = min(ys), max(ys)
        if self.x0 == self.x1:
            self.x0, self.x1 = self.x0 / 2, self.x1 * 2
        if self.y0 == self.y1:
            self.y0, self.y1 = self.y0 / 2, self.y1 * 2
        self.y0 /= 1.3
        self.y1 *= 1.3

    def px(self, x):
        f = (math.log10(x) - math.log10(self.x0)) / (math.log10(self.x1) - math.log10(self.x0))
        return _ML + f * (_W - _ML - _MR)

    def py(self, y):
        f = (math.log10(y) - math.log10(self.y0)) / (math.log10(self.y1) - math.log10(self.y0))
        return _H - _MB - f * (_H - _MT - _MB)


def rates_svg(points, title="measured distance vs horizon") -> str:
    """Render rows (dicts with n, delta_hat, mc_error, theorem_bound) as SVG."""
    pts = [p for p in points if p.get("delta_hat")]
    if not pts:
        raise ValueError("no plottable points")
    xs = [p["n"] for p in pts]
    ys = [p["delta_hat"] for p in pts]
    floors = [p["mc_error"] for p in pts if p.get("mc_error")]
    bounds = [p["theorem_bound"] for p in pts if p.get("theorem_bound")]
    ax = _LogAxes(xs, [v for v in ys + floors + bounds if v and v > 0])

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="monospace" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
        'fill="none" stroke="black"/>',
        f'<text x="{_W / 2:.1f}" y="16" text-anchor="middle">{title}</text>',
    ]

    for tx in _log_ticks(ax.x0, ax.x1):
        px = ax.px(tx)
        out.append(f'<line x1="{px:.2f}" y1="{_H - _MB}" x2="{px:.2f}" y2="{_H - _MB + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{_H - _MB + 18}" text-anchor="middle">{_fmt_pow10(tx)}</text>')
    for ty in _log_ticks(ax.y0, ax.y1):
        py = ax.py(ty)
        out.append(f'<line x1="{_ML - 5}" y1="{py:.2f}" x2="{_ML}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 8}" y="{py + 4:.2f}" text-anchor="end">{_fmt_pow10(ty)}</text>')
    out.append(f'<text x="{_W / 2:.1f}" y="{_H - 8}" text-anchor="middle">horizon n</text>')

    # noise-floor band (shaded from the bottom of the frame up to the floor)
    if floors:
        band = " ".join(
            f"{ax.px(p['n']):.2f},{ax.py(p['mc_error']):.2f}" for p in pts if p.get("mc_error")
        )
        first_x = ax.px(pts[0]["n"])
        last_x = ax.px(pts[-1]["n"])
        out.append(
            f'<polygon points="{first_x:.2f},{_H - _MB} {band} {last_x:.2f},{_H - _MB}" '
            'fill="#cccccc" fill-opacity="0.5" stroke="none"/>'
        )

    if bounds:
        line = " ".join(
            f"{ax.px(p['n']):.2f},{ax.py(p['theorem_bound']):.2f}"
            for p in pts
            if p.get("theorem_bound")
        )
        out.append(f'<polyline points="{line}" fill="none" stroke="#d62728" stroke-dasharray="6 3"/>')

    for p in pts:
        cx, cy = ax.px(p["n"]), ax.py(p["delta_hat"])
        fill = "#1f77b4" if not p.get("flag") else "#aaaaaa"
        out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3.5" fill="{fill}"/>')

    legend_y = _MT + 14
    out.append(f'<circle cx="{_ML + 12}" cy="{legend_y}" r="3.5" fill="#1f77b4"/>')
    out.append(f'<text x="{_ML + 22}" y="{legend_y + 4}">measured distance</text>')
    out.append(
        f'<line x1="{_ML + 6}" y1="{legend_y + 18}" x2="{_ML + 18}" y2="{legend_y + 18}" '
        'stroke="#d62728" stroke-dasharray="6 3"/>'
    )
    out.append(f'<text x="{_ML + 22}" y="{legend_y + 22}">assembled bound</text>')
    out.append(
        f'<rect x="{_ML + 6}" y="{legend_y + 30}" width="12" height="8" fill="#cccccc" fill-opacity="0.5"/>'
    )
    out.append(f'<text x="{_ML + 22}" y="{legend_y + 38}">noise floor</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_rates_svg(path, points, **kwargs):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(rates_svg(points, **kwargs))
