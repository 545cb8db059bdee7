"""Tiny hand-rolled SVG emitters for the two geographic views: the
outlier-score heat map and the cluster-membership scatter. No plotting
dependency; output is a flat list of <circle> elements."""

import numpy as np

from .types import GridwardError

# Categorical palette, distinct at a glance. Cluster c uses entry
# c % len(PALETTE).
PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)

_W, _H, _MARGIN, _R = 640, 480, 48, 6


def _project(points):
    """Map (lat, lon) pairs onto the canvas: lon -> x, lat -> y with the
    y axis flipped so north is up. Degenerate spans collapse to center."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise GridwardError("svg: expected a list of (lat, lon) pairs")
    lat, lon = pts[:, 0], pts[:, 1]
    span_x = lon.max() - lon.min()
    span_y = lat.max() - lat.min()
    inner_w, inner_h = _W - 2 * _MARGIN, _H - 2 * _MARGIN
    if span_x > 0:
        x = _MARGIN + (lon - lon.min()) / span_x * inner_w
    else:
        x = np.full(pts.shape[0], _W / 2.0)
    if span_y > 0:
        y = _MARGIN + (lat.max() - lat) / span_y * inner_h
    else:
        y = np.full(pts.shape[0], _H / 2.0)
    return x, y


def _ramp_color(t: float) -> str:
    """Green -> yellow -> red, t clamped to [0, 1]."""
    t = min(max(t, 0.0), 1.0)
    if t < 0.5:
        f = t / 0.5
        r = int(46 + f * (255 - 46))
        g = int(204 + f * (220 - 204))
        b = int(64 + f * (0 - 64))
    else:
        f = (t - 0.5) / 0.5
        r = int(255 + f * (220 - 255))
        g = int(220 + f * (38 - 220))
        b = int(f * 38)
    return f"#{r:02x}{g:02x}{b:02x}"


def _write_svg(path: str, body: list) -> None:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">\n'
        f'<rect width="{_W}" height="{_H}" fill="#ffffff"/>\n'
    )
    with open(path, "w") as fh:
        fh.write(head)
        fh.write("\n".join(body))
        fh.write("\n</svg>\n")


def heatmap_svg(points, scores, path: str, window: int = 40) -> None:
    """Geographic scatter colored by outlier score on a fixed ramp over
    [0, 2 * window], so colors are comparable across runs."""
    s = np.asarray(scores, dtype=np.float64)
    x, y = _project(points)
    if s.shape[0] != x.shape[0]:
        raise GridwardError("heatmap_svg: scores and points length mismatch")
    if window < 1:
        raise GridwardError("heatmap_svg: window must be >= 1")
    top = 2.0 * window
    body = []
    for i in range(x.shape[0]):
        c = _ramp_color(float(s[i]) / top)
        body.append(
            f'<circle cx="{x[i]:.2f}" cy="{y[i]:.2f}" r="{_R}" fill="{c}" '
            f'stroke="#333333" stroke-width="0.5"/>'
        )
    # Legend: three labeled ramp stops.
    for j, t in enumerate((0.0, 0.5, 1.0)):
        lx = _MARGIN + j * 70
        body.append(
            f'<rect x="{lx}" y="{_H - 28}" width="14" height="14" '
            f'fill="{_ramp_color(t)}"/>'
        )
        body.append(
            f'<text x="{lx + 18}" y="{_H - 16}" font-size="12" '
            f'font-family="sans-serif">{t * top:g}</text>'
        )
    _write_svg(path, body)


def cluster_scatter(points, assignment, path: str) -> None:
    """Geographic scatter with one fill color per cluster id."""
    a = np.asarray(assignment, dtype=np.int64)
    x, y = _project(points)
    if a.shape[0] != x.shape[0]:
        raise GridwardError("cluster_scatter: assignment length mismatch")
    if a.min() < 0:
        raise GridwardError("cluster_scatter: negative cluster id")
    body = []
    for i in range(x.shape[0]):
        c = PALETTE[int(a[i]) % len(PALETTE)]
        body.append(
            f'<circle cx="{x[i]:.2f}" cy="{y[i]:.2f}" r="{_R}" fill="{c}" '
            f'stroke="#333333" stroke-width="0.5"/>'
        )
    for j, cid in enumerate(np.unique(a)):
        lx = _MARGIN + j * 70
        body.append(
            f'<rect x="{lx}" y="{_H - 28}" width="14" height="14" '
            f'fill="{PALETTE[int(cid) % len(PALETTE)]}"/>'
        )
        body.append(
            f'<text x="{lx + 18}" y="{_H - 16}" font-size="12" '
            f'font-family="sans-serif">c{int(cid)}</text>'
        )
    _write_svg(path, body)
