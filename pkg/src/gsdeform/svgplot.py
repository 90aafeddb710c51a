"""Hand-rolled SVG line plots: axes, ticks, error bars, legend.

No plotting dependency; output is deterministic for fixed input (floats are
formatted with %.6g throughout), which keeps artifact files reproducible.
"""

import math

__all__ = ["svg_line_plot"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x):
    return f"{x:.6g}"


def _ticks(lo, hi, target=5):
    """Round tick positions covering [lo, hi]."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("axis limits must be finite")
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-9 * step:
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


def svg_line_plot(series, xlabel, ylabel, title=None, width=640, height=440):
    """Render series of (label, xs, ys, errs-or-None) into an SVG string."""
    if not series:
        raise ValueError("need at least one series")
    xs_all = [float(x) for _, xs, _, _ in series for x in xs]
    ys_all = [float(y) for _, _, ys, _ in series for y in ys]
    for label, xs, ys, errs in series:
        if len(xs) != len(ys) or (errs is not None and len(errs) != len(xs)):
            raise ValueError(f"series {label!r} has mismatched lengths")
        if errs is not None:
            ys_all += [float(y) + float(e) for y, e in zip(ys, errs)]
            ys_all += [float(y) - float(e) for y, e in zip(ys, errs)]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad_x = 0.04 * (x_hi - x_lo)
    pad_y = 0.06 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - pad_x, x_hi + pad_x
    y_lo, y_hi = y_lo - pad_y, y_hi + pad_y

    left, right, top, bottom = 62, 16, 34 if title else 16, 48

    def sx(x):
        return left + (float(x) - x_lo) / (x_hi - x_lo) * (width - left - right)

    def sy(y):
        return height - bottom - (float(y) - y_lo) / (y_hi - y_lo) * (
            height - top - bottom)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{width / 2:.6g}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>')

    axis = (f'M {left} {top} L {left} {height - bottom} '
            f'L {width - right} {height - bottom}')
    out.append(f'<path d="{axis}" fill="none" stroke="black" stroke-width="1"/>')

    for t in _ticks(x_lo + pad_x, x_hi - pad_x):
        px = sx(t)
        out.append(
            f'<line x1="{_fmt(px)}" y1="{height - bottom}" x2="{_fmt(px)}" '
            f'y2="{height - bottom + 5}" stroke="black"/>')
        out.append(
            f'<text x="{_fmt(px)}" y="{height - bottom + 18}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">'
            f'{_fmt(t)}</text>')
    for t in _ticks(y_lo + pad_y, y_hi - pad_y):
        py = sy(t)
        out.append(
            f'<line x1="{left - 5}" y1="{_fmt(py)}" x2="{left}" '
            f'y2="{_fmt(py)}" stroke="black"/>')
        out.append(
            f'<text x="{left - 8}" y="{_fmt(py + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>')

    out.append(
        f'<text x="{(left + width - right) / 2:.6g}" y="{height - 10}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12">'
        f'{xlabel}</text>')
    out.append(
        f'<text x="14" y="{(top + height - bottom) / 2:.6g}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 14 {(top + height - bottom) / 2:.6g})">'
        f'{ylabel}</text>')

    for idx, (label, xs, ys, errs) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        if errs is not None:
            for x, y, e in zip(xs, ys, errs):
                out.append(
                    f'<line x1="{_fmt(sx(x))}" y1="{_fmt(sy(float(y) - float(e)))}" '
                    f'x2="{_fmt(sx(x))}" y2="{_fmt(sy(float(y) + float(e)))}" '
                    f'stroke="{color}" stroke-width="1"/>')
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>')
        for x, y in zip(xs, ys):
            out.append(
                f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="2.5" '
                f'fill="{color}"/>')
        ly = top + 16 + 16 * idx
        lx = width - right - 150
        out.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>')
        out.append(
            f'<text x="{lx + 30}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{label}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
