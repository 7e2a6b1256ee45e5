"""Deterministic SVG emission for orbit portraits.

Byte-stable output for fixed inputs: fixed viewport, fixed float formatting,
no timestamps.  The critical set is drawn as the zero contour of the defining
function restricted to the projection plane (marching squares).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

STYLES = {
    "SingularPeriodic": ("#cc0000", 1.6),
    "GeneralizedSingularPeriodic": ("#1f77b4", 0.9),
    "EscapeOrbit": ("#ff7f0e", 1.2),
    "GeneralizedEscape": ("#2ca02c", 0.9),
    "PeriodicOffZ": ("#9467bd", 1.4),
    "Unresolved": ("#7f7f7f", 0.7),
    "default": ("#333333", 0.9),
    "critical": ("#cc0000", 1.2),
    "separatrix": ("#cc0000", 1.3),
    "orbit": ("#1f77b4", 0.9),
}


def _fmt(v):
    return f"{v:.4f}"


def _contour_segments(fn, bounds, n=96):
    """Zero-contour of fn over a plane rectangle by marching squares."""
    (x0, x1), (y0, y1) = bounds
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    vals = np.array([[fn(x, y) for y in ys] for x in xs])
    segs = []

    def interp(pa, va, pb, vb):
        t = va / (va - vb)
        return (pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]))

    for i in range(n - 1):
        for j in range(n - 1):
            corners = [((xs[i], ys[j]), vals[i, j]),
                       ((xs[i + 1], ys[j]), vals[i + 1, j]),
                       ((xs[i + 1], ys[j + 1]), vals[i + 1, j + 1]),
                       ((xs[i], ys[j + 1]), vals[i, j + 1])]
            pts = []
            for k in range(4):
                (pa, va), (pb, vb) = corners[k], corners[(k + 1) % 4]
                if va == 0.0:
                    pts.append(pa)
                elif (va < 0.0) != (vb < 0.0):
                    pts.append(interp(pa, va, pb, vb))
            if len(pts) >= 2:
                segs.append((pts[0], pts[1]))
            if len(pts) == 4:
                segs.append((pts[2], pts[3]))
    return segs


def emit_plot(trajectories, projection, path, bchart=None, bounds=None,
              size=640, margin=40, title=""):
    """Write an SVG portrait of trajectories.

    ``trajectories``: sequence of (trajectory-or-states, style_key).
    ``projection``: either a pair of coordinate indices (polyline projection)
    or a flow Section, in which case the crossing points of each trajectory
    are scattered over the two coordinates complementary to the section's
    steepest axis (dense output required).  When ``bchart`` is given, the
    zero set of its defining function (other coordinates frozen at 0) is
    drawn as well.
    """
    from .flow import Section, section_crossings

    trajectories = list(trajectories)
    if not trajectories:
        raise ConfigError("no trajectories to plot")

    scatter = isinstance(projection, Section)
    if scatter:
        resolved = []
        axis = None
        for traj, style in trajectories:
            crossings = section_crossings(traj, projection)
            if not crossings:
                continue
            if axis is None:
                g = projection.g.gradient(crossings[0][1])
                axis = int(np.argmax(np.abs(g)))
            resolved.append((np.array([s for _, s in crossings]), style))
        if not resolved:
            raise ConfigError("no section crossings to plot")
        dims = [k for k in range(resolved[0][0].shape[1]) if k != axis]
        i, j = dims[0], dims[-1] if len(dims) > 1 else dims[0]
        trajectories = resolved
    else:
        i, j = projection
        trajectories = [(t.states if hasattr(t, "states") else t, s)
                        for t, s in trajectories]

    chart_dim = None
    xs_all, ys_all = [], []
    for states, _ in trajectories:
        arr = np.asarray(states)
        chart_dim = arr.shape[1]
        xs_all.append(arr[:, i])
        ys_all.append(arr[:, j])
    if bounds is None:
        x_lo = min(float(np.min(v)) for v in xs_all)
        x_hi = max(float(np.max(v)) for v in xs_all)
        y_lo = min(float(np.min(v)) for v in ys_all)
        y_hi = max(float(np.max(v)) for v in ys_all)
        pad_x = 0.05 * max(x_hi - x_lo, 1e-6)
        pad_y = 0.05 * max(y_hi - y_lo, 1e-6)
        bounds = ((x_lo - pad_x, x_hi + pad_x), (y_lo - pad_y, y_hi + pad_y))
    (x0, x1), (y0, y1) = bounds

    inner = size - 2 * margin

    def to_px(x, y):
        px = margin + inner * (x - x0) / (x1 - x0)
        py = size - margin - inner * (y - y0) / (y1 - y0)
        return px, py

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{size}" height="{size}" viewBox="0 0 {size} {size}">\n',
        f'<rect width="{size}" height="{size}" fill="white"/>\n',
    ]
    if title:
        parts.append(f'<text x="{margin}" y="{margin - 14}" '
                     f'font-family="monospace" font-size="13">{title}</text>\n')
    parts.append(f'<rect x="{margin}" y="{margin}" width="{inner}" height="{inner}" '
                 'fill="none" stroke="#999999" stroke-width="0.8"/>\n')

    if bchart is not None and not bchart.smooth:
        def plane_fn(a, b):
            c = [0.0] * chart_dim
            c[i], c[j] = a, b
            return bchart.t(c)

        color, width = STYLES["critical"]
        for (pa, pb) in _contour_segments(plane_fn, bounds):
            (ax, ay), (bx, by) = to_px(*pa), to_px(*pb)
            parts.append(f'<line x1="{_fmt(ax)}" y1="{_fmt(ay)}" '
                         f'x2="{_fmt(bx)}" y2="{_fmt(by)}" stroke="{color}" '
                         f'stroke-width="{width}" stroke-dasharray="4,3"/>\n')

    for states, style_key in trajectories:
        color, width = STYLES.get(style_key, STYLES["default"])
        arr = np.asarray(states)
        if scatter:
            for s in arr:
                px, py = to_px(s[i], s[j])
                parts.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="2" '
                             f'fill="{color}"/>\n')
        else:
            pts = " ".join(f"{_fmt(px)},{_fmt(py)}"
                           for px, py in (to_px(s[i], s[j]) for s in arr))
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                         f'stroke-width="{width}"/>\n')

    parts.append("</svg>\n")
    with open(path, "w") as fh:
        fh.write("".join(parts))
    return path
