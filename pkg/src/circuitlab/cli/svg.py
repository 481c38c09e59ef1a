"""Minimal static line plots, one series per system size."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

W, H = 640, 420
ML, MR, MT, MB = 70, 110, 30, 55
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    step = 10 ** np.floor(np.log10((hi - lo) / n))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (step * m) <= n:
            step *= m
            break
    start = np.ceil(lo / step) * step
    return list(np.arange(start, hi + step / 2, step))


def _fmt(v) -> str:
    return f"{v:.4g}"


def line_plot(series: dict, xlabel: str, ylabel: str, title: str) -> bytes:
    """``series`` maps a legend label to (x, y, yerr) arrays."""
    xs = np.concatenate([np.asarray(s[0], float) for s in series.values()]) if series else np.zeros(1)
    ys = np.concatenate([np.asarray(s[1], float) for s in series.values()]) if series else np.zeros(1)
    ok = np.isfinite(xs) & np.isfinite(ys)
    x0, x1 = (xs[ok].min(), xs[ok].max()) if ok.any() else (0.0, 1.0)
    y0, y1 = (ys[ok].min(), ys[ok].max()) if ok.any() else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = W - ML - MR, H - MT - MB

    def X(v):
        return ML + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return MT + ph - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
           'font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{ML + pw / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{X(t):.1f}" y1="{MT + ph}" x2="{X(t):.1f}" y2="{MT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X(t):.1f}" y="{MT + ph + 18}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{ML - 5}" y1="{Y(t):.1f}" x2="{ML}" y2="{Y(t):.1f}" stroke="black"/>')
        out.append(f'<text x="{ML - 8}" y="{Y(t) + 4:.1f}" text-anchor="end">{_fmt(t)}</text>')
    out.append(f'<text x="{ML + pw / 2:.1f}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MT + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MT + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (label, (x, y, e)) in enumerate(series.items()):
        c = COLORS[i % len(COLORS)]
        order = np.argsort(x)
        x, y, e = np.asarray(x, float)[order], np.asarray(y, float)[order], np.asarray(e, float)[order]
        pts = " ".join(f"{X(a):.1f},{Y(b):.1f}" for a, b in zip(x, y) if np.isfinite(a) and np.isfinite(b))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="1.5"/>')
        for a, b, s in zip(x, y, e):
            if s > 0 and np.isfinite(s):
                out.append(f'<line x1="{X(a):.1f}" y1="{Y(b - s):.1f}" x2="{X(a):.1f}" y2="{Y(b + s):.1f}" '
                           f'stroke="{c}"/>')
            out.append(f'<circle cx="{X(a):.1f}" cy="{Y(b):.1f}" r="2.5" fill="{c}"/>')
        ly = MT + 14 + 18 * i
        out.append(f'<line x1="{W - MR + 10}" y1="{ly - 4}" x2="{W - MR + 30}" y2="{ly - 4}" stroke="{c}" '
                   'stroke-width="2"/>')
        out.append(f'<text x="{W - MR + 35}" y="{ly}">{escape(str(label))}</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def table_plot(rows, x_label: str, y_label: str, title: str, p_label: str = "p") -> bytes:
    """Mean y (± stderr over realizations) against x, one curve per (L, p)."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r["L"], r["p"]), {}).setdefault(r["x"], []).append(r["y"])
    multi_p = len({k[1] for k in groups}) > 1
    multi_x = any(len(v) > 1 for v in groups.values())
    series = {}
    if multi_p and not multi_x:
        # scalar-per-realization experiments: x is the control parameter, one curve per L
        by_L: dict = {}
        for (L, p), d in groups.items():
            for x, ys in d.items():
                by_L.setdefault(L, []).append((x, np.mean(ys), np.std(ys, ddof=1) / np.sqrt(len(ys))
                                               if len(ys) > 1 else 0.0))
        for L, pts in sorted(by_L.items()):
            a = np.array(pts)
            series[f"L={L}"] = (a[:, 0], a[:, 1], a[:, 2])
    else:
        for (L, p), d in sorted(groups.items()):
            xs = sorted(d)
            m = [np.mean(d[x]) for x in xs]
            e = [np.std(d[x], ddof=1) / np.sqrt(len(d[x])) if len(d[x]) > 1 else 0.0 for x in xs]
            label = f"L={L}" + (f", {p_label}={p:g}" if multi_p else "")
            series[label] = (np.array(xs, float), np.array(m), np.array(e))
    return line_plot(series, x_label, y_label, title)
