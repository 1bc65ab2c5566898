"""Minimal deterministic SVG writer and the per-image plot panels.

Every number is printed with a fixed number of decimals and elements are
emitted in data order, so identical inputs give byte-identical files.

Heatmaps use the viridis colormap, linearly interpolated between the nine
anchor colours in ``VIRIDIS``.
"""

from __future__ import annotations

import math
from html import escape

import numpy as np

from ..coords import elevation_m, size_m
from ..spatial.overlay import principal_arrow, to_pixels

VIRIDIS = (
    (0x44, 0x01, 0x54),
    (0x47, 0x2D, 0x7B),
    (0x3B, 0x52, 0x8B),
    (0x2C, 0x72, 0x8E),
    (0x21, 0x91, 0x8C),
    (0x28, 0xAE, 0x80),
    (0x5E, 0xC9, 0x62),
    (0xAD, 0xDC, 0x30),
    (0xFD, 0xE7, 0x25),
)
HEATMAP_CELLS = 64
LOG_DENSITY_SPAN = 8.0  # natural-log units shown below the peak


def colormap(t: float) -> str:
    t = min(max(t, 0.0), 1.0) * (len(VIRIDIS) - 1)
    i = min(int(t), len(VIRIDIS) - 2)
    f = t - i
    a, b = VIRIDIS[i], VIRIDIS[i + 1]
    return "#%02x%02x%02x" % tuple(round(a[k] + f * (b[k] - a[k])) for k in range(3))


def _f(v):
    return f"{v:.3f}"


class Panel:
    """A plotting area mapping a data rectangle onto an SVG viewport."""

    def __init__(self, xlim, ylim, left=60, top=40, width=400, height=400):
        self.xlim, self.ylim = xlim, ylim
        self.left, self.top, self.w, self.h = left, top, width, height

    def px(self, x, y):
        (x0, x1), (y0, y1) = self.xlim, self.ylim
        sx = self.left + (x - x0) / (x1 - x0) * self.w
        sy = self.top + (1.0 - (y - y0) / (y1 - y0)) * self.h
        return sx, sy


class Svg:
    def __init__(self, width=520, height=500, title=""):
        self.width, self.height = width, height
        self.parts: list[str] = []
        if title:
            self.text(width / 2, 22, title, size=15, anchor="middle")

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0, cls=None):
        c = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<line{c} x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{stroke}" stroke-width="{_f(width)}"/>'
        )

    def circle(self, x, y, r, fill="#000", stroke="none", cls=None, opacity=1.0):
        c = f' class="{cls}"' if cls else ""
        op = f' fill-opacity="{_f(opacity)}"' if opacity < 1 else ""
        self.parts.append(
            f'<circle{c} cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" fill="{fill}" stroke="{stroke}"{op}/>'
        )

    def rect(self, x, y, w, h, fill="none", stroke="none", cls=None):
        c = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<rect{c} x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" fill="{fill}" stroke="{stroke}"/>'
        )

    def polyline(self, pts, stroke="#000", width=1.5, cls=None, dash=None):
        c = f' class="{cls}"' if cls else ""
        d = f' stroke-dasharray="{dash}"' if dash else ""
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in pts)
        self.parts.append(
            f'<polyline{c} points="{coords}" fill="none" stroke="{stroke}" stroke-width="{_f(width)}"{d}/>'
        )

    def text(self, x, y, s, size=11, anchor="start", rotate=None):
        rot = f' transform="rotate({rotate} {_f(x)} {_f(y)})"' if rotate is not None else ""
        self.parts.append(
            f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}"{rot}>{escape(str(s))}</text>'
        )

    def axes(self, panel: Panel, xlabel="", ylabel="", ticks=5):
        self.rect(panel.left, panel.top, panel.w, panel.h, stroke="#000")
        (x0, x1), (y0, y1) = panel.xlim, panel.ylim
        for k in range(ticks):
            fx = x0 + (x1 - x0) * k / (ticks - 1)
            sx, sy = panel.px(fx, y0)
            self.line(sx, sy, sx, sy + 4)
            self.text(sx, sy + 16, f"{fx:.2f}", size=9, anchor="middle")
            fy = y0 + (y1 - y0) * k / (ticks - 1)
            sx, sy = panel.px(x0, fy)
            self.line(sx - 4, sy, sx, sy)
            self.text(sx - 6, sy + 3, f"{fy:.2f}", size=9, anchor="end")
        self.text(panel.left + panel.w / 2, panel.top + panel.h + 32, xlabel, anchor="middle")
        self.text(panel.left - 42, panel.top + panel.h / 2, ylabel, anchor="middle", rotate=-90)

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="#fff"/>\n'
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"


def _limits(v, pad=0.05):
    lo, hi = float(np.min(v)), float(np.max(v))
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    d = (hi - lo) * pad
    return lo - d, hi + d


WINDOW = ((-1.0, 1.0), (-1.0, 1.0))


# -- panels ------------------------------------------------------------------


def heatmap(analysis) -> str:
    """Natural-log KDE density with hotspot markers."""
    dens = analysis.density
    svg = Svg(title=f"{analysis.cloud.image_id}: density heatmap (log f)")
    p = Panel(*WINDOW)
    grid = dens.grid
    R = grid.shape[0]
    block = max(1, R // HEATMAP_CELLS)
    m = R // block
    coarse = grid[: m * block, : m * block].reshape(m, block, m, block).mean(axis=(1, 3))
    with np.errstate(divide="ignore"):
        logf = np.log(coarse)
    top = float(np.max(logf))
    cell = 2.0 / m
    for iy in range(m):
        for ix in range(m):
            t = (logf[iy, ix] - (top - LOG_DENSITY_SPAN)) / LOG_DENSITY_SPAN
            x0, y1 = -1.0 + ix * cell, -1.0 + (iy + 1) * cell
            sx, sy = p.px(x0, y1)
            svg.rect(sx, sy, p.w / m + 0.05, p.h / m + 0.05, fill=colormap(t if np.isfinite(t) else 0.0))
    for rank, h in enumerate(dens.hotspots, 1):
        sx, sy = p.px(h.x, h.y)
        svg.circle(sx, sy, 7, fill="none", stroke="#ff2d2d", cls="hotspot")
        svg.text(sx + 9, sy - 6, f"#{rank}", size=10)
    svg.axes(p, "x", "y")
    return svg.render()


def pca_plot(analysis) -> str:
    res = analysis.pca
    xy = analysis.cloud.xy
    svg = Svg(title=f"{analysis.cloud.image_id}: principal directions")
    p = Panel(*WINDOW)
    for x, y in xy:
        svg.circle(*p.px(x, y), 2.0, fill="#777", opacity=0.6)
    mx, my = res.mean
    for vec, lam, colour, cls in ((res.v1, res.lambda1, "#d62728", "pc1"), (res.v2, res.lambda2, "#1f77b4", "pc2")):
        length = 2.0 * math.sqrt(max(lam, 0.0))
        svg.line(*p.px(mx, my), *p.px(mx + length * vec[0], my + length * vec[1]), stroke=colour, width=2.5, cls=cls)
    svg.text(p.left, p.top + p.h + 48, f"PC1 {res.var_ratio1:.1%}  PC2 {res.var_ratio2:.1%}", size=10)
    svg.axes(p, "x", "y")
    return svg.render()


def size_depth_plot(analysis) -> str:
    fit = analysis.fit
    cloud = analysis.cloud
    ok = (cloud.z > 0) & (cloud.s > 0)
    lz, ls = np.log(cloud.z[ok]), np.log(cloud.s[ok])
    svg = Svg(title=f"{cloud.image_id}: size-depth (beta={fit.beta:.4f}, R2={fit.r_squared:.4f})")
    p = Panel(_limits(lz), _limits(ls))
    for a, b in zip(lz, ls):
        svg.circle(*p.px(a, b), 2.0, fill="#444", opacity=0.7)
    x0, x1 = p.xlim
    svg.line(*p.px(x0, fit.alpha + fit.beta * x0), *p.px(x1, fit.alpha + fit.beta * x1), stroke="#d62728", width=2, cls="fit")
    svg.axes(p, "log z", "log s")
    return svg.render()


def delaunay_plot(analysis) -> str:
    xy = analysis.cloud.xy
    e = analysis.edges
    svg = Svg(title=f"{analysis.cloud.image_id}: Delaunay mesh (mean edge {e.mean:.4f})")
    p = Panel(*WINDOW)
    for i, j in e.edges:
        svg.line(*p.px(*xy[i]), *p.px(*xy[j]), stroke="#1f77b4", width=0.8, cls="edge")
    for x, y in xy:
        svg.circle(*p.px(x, y), 1.8, fill="#000")
    svg.axes(p, "x", "y")
    return svg.render()


def kfunction_plot(analysis) -> str:
    k = analysis.k_function
    r = np.asarray(k.radii)
    svg = Svg(title=f"{analysis.cloud.image_id}: Ripley K ({k.window} window)")
    top = max(max(k.k_observed), max(k.k_poisson))
    p = Panel((0.0, float(r[-1])), (0.0, top * 1.05 if top > 0 else 1.0))
    svg.polyline([p.px(a, b) for a, b in zip([0.0, *r], [0.0, *k.k_poisson])], stroke="#555", dash="5,4", cls="poisson")
    svg.polyline([p.px(a, b) for a, b in zip([0.0, *r], [0.0, *k.k_observed])], stroke="#d62728", cls="observed")
    svg.axes(p, "r", "K(r)")
    return svg.render()


def _histogram(values, title, xlabel, bins=20) -> str:
    values = np.asarray(values, dtype=float)
    counts, edges = np.histogram(values, bins=bins)
    svg = Svg(title=title)
    p = Panel((float(edges[0]), float(edges[-1])) if edges[-1] > edges[0] else _limits(values), (0.0, max(1, counts.max()) * 1.05))
    for c, a, b in zip(counts, edges[:-1], edges[1:]):
        x0, y0 = p.px(a, c)
        x1, _ = p.px(b, 0)
        svg.rect(x0, y0, max(x1 - x0, 0.0), p.top + p.h - y0, fill="#4c72b0", stroke="#fff", cls="bar")
    svg.axes(p, xlabel, "count")
    return svg.render()


def elevation_plot(analysis) -> str:
    c = analysis.cloud
    vals = [elevation_m(pt, c.height, c.scale) for pt in c.points]
    return _histogram(vals, f"{c.image_id}: fragment elevation", "elevation (m)")


def size_plot(analysis) -> str:
    c = analysis.cloud
    vals = [size_m(pt, c.width, c.height, c.scale) for pt in c.points]
    return _histogram(vals, f"{c.image_id}: fragment size", "size (m)")


def scatter3d_plot(analysis) -> str:
    """The (x, y, z) cloud as three orthogonal projections coloured by s."""
    c = analysis.cloud
    xy, z, s = c.xy, c.z, c.s
    smin, smax = float(s.min()), float(s.max())
    span = smax - smin if smax > smin else 1.0
    svg = Svg(width=1380, height=500, title=f"{c.image_id}: 3D fragment distribution (colour = s)")
    views = (("x", "y", xy[:, 0], xy[:, 1], WINDOW), ("x", "z", xy[:, 0], z, ((-1, 1), (0, 1))), ("y", "z", xy[:, 1], z, ((-1, 1), (0, 1))))
    for k, (xl, yl, a, b, lims) in enumerate(views):
        p = Panel(*lims, left=60 + 450 * k)
        for i in range(len(a)):
            svg.circle(*p.px(a[i], b[i]), 2.2, fill=colormap((s[i] - smin) / span))
        svg.axes(p, xl, yl)
    return svg.render()


def overlay_plot(analysis, arrow_length=None) -> str:
    """Pixel-space overlay: fragment boxes' centers, hotspots and the principal arrow."""
    c = analysis.cloud
    W, H = c.width, c.height
    L = arrow_length if arrow_length is not None else 0.2 * min(W, H)
    k = 480.0 / max(W, H)
    svg = Svg(width=int(W * k) + 40, height=int(H * k) + 60, title=f"{c.image_id}: overlay (pixels)")
    ox, oy = 20.0, 40.0
    svg.rect(ox, oy, W * k, H * k, stroke="#000", cls="frame")
    for pt in c.points:
        px, py = to_pixels(pt.x, pt.y, W, H)
        svg.circle(ox + px * k, oy + py * k, 1.8, fill="#777")
    if analysis.density is not None:
        for h in analysis.density.hotspots[:3]:
            px, py = to_pixels(h.x, h.y, W, H)
            svg.circle(ox + px * k, oy + py * k, 8, fill="none", stroke="#ff2d2d", cls="hotspot")
    if analysis.pca is not None:
        (x0, y0), (x1, y1) = principal_arrow(W, H, analysis.pca.v1, L)
        svg.line(ox + x0 * k, oy + y0 * k, ox + x1 * k, oy + y1 * k, stroke="#d62728", width=3, cls="arrow")
    return svg.render()


# name -> (renderer, attribute that must be present, needs metric scale)
PANELS = {
    "heatmap": (heatmap, "density", False),
    "pca": (pca_plot, "pca", False),
    "size_depth": (size_depth_plot, "fit", False),
    "delaunay": (delaunay_plot, "edges", False),
    "kfunction": (kfunction_plot, "k_function", False),
    "elevation": (elevation_plot, None, True),
    "size": (size_plot, None, True),
    "scatter3d": (scatter3d_plot, None, False),
    "overlay": (overlay_plot, None, False),
}
