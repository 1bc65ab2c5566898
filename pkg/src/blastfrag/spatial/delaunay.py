"""Bowyer-Watson Delaunay triangulation and edge-length statistics.

Orientation and incircle signs are computed in floating point and re-done
with exact rational arithmetic whenever the determinant is too small to
trust.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..exceptions import DegenerateError

_REL_TOL = 1e-12


@dataclass(frozen=True)
class EdgeStats:
    edges: tuple[tuple[int, int], ...]
    lengths: tuple[float, ...]
    triangles: tuple[tuple[int, int, int], ...]
    mean: float
    std: float
    min: float
    max: float


def orient(a, b, c) -> int:
    """Sign of the doubled signed area of triangle abc (+1 counter-clockwise)."""
    l = (b[0] - a[0]) * (c[1] - a[1])
    r = (b[1] - a[1]) * (c[0] - a[0])
    det = l - r
    if abs(det) > _REL_TOL * (abs(l) + abs(r)):
        return 1 if det > 0 else -1
    fa, fb, fc = [(Fraction(p[0]), Fraction(p[1])) for p in (a, b, c)]
    det = (fb[0] - fa[0]) * (fc[1] - fa[1]) - (fb[1] - fa[1]) * (fc[0] - fa[0])
    return (det > 0) - (det < 0)


def incircle(a, b, c, d) -> int:
    """+1 if d is strictly inside the circle through counter-clockwise a, b, c."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    t1 = alift * (bdx * cdy - cdx * bdy)
    t2 = blift * (cdx * ady - adx * cdy)
    t3 = clift * (adx * bdy - bdx * ady)
    det = t1 + t2 + t3
    scale = abs(t1) + abs(t2) + abs(t3)
    if abs(det) > _REL_TOL * scale:
        return 1 if det > 0 else -1
    return _incircle_exact(a, b, c, d)


def _incircle_exact(a, b, c, d):
    F = Fraction
    adx, ady = F(a[0]) - F(d[0]), F(a[1]) - F(d[1])
    bdx, bdy = F(b[0]) - F(d[0]), F(b[1]) - F(d[1])
    cdx, cdy = F(c[0]) - F(d[0]), F(c[1]) - F(d[1])
    det = (
        (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
    )
    return (det > 0) - (det < 0)


def triangulate(points) -> list[tuple[int, int, int]]:
    """Delaunay triangles of a 2D point set as counter-clockwise index triples.

    Points are inserted in lexicographic order, which fixes the output for
    cocircular inputs.  Duplicate points are skipped.
    """
    pts = [tuple(map(float, p)) for p in np.asarray(points, dtype=float)]
    n = len(pts)
    if n < 3:
        raise DegenerateError(f"triangulation needs 3 points, got {n}")
    if all(orient(pts[0], pts[1], p) == 0 for p in pts[2:]) or len(set(pts)) < 3:
        raise DegenerateError("all points are collinear")

    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    cx, cy = 0.5 * (min(xs) + max(xs)), 0.5 * (min(ys) + max(ys))
    span = max(max(xs) - min(xs), max(ys) - min(ys), 1e-12)
    big = 1e5 * span
    # super-triangle vertices get indices n, n+1, n+2
    verts = pts + [(cx - 2 * big, cy - big), (cx + 2 * big, cy - big), (cx, cy + 2 * big)]
    triangles = {(n, n + 1, n + 2)}

    seen = set()
    for i in sorted(range(n), key=lambda k: pts[k]):
        p = verts[i]
        if p in seen:
            continue
        seen.add(p)
        bad = [t for t in triangles if incircle(verts[t[0]], verts[t[1]], verts[t[2]], p) > 0]
        # boundary of the cavity: edges of bad triangles not shared by two of them
        count = {}
        for t in bad:
            for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                key = (min(e), max(e))
                count[key] = count.get(key, 0) + 1
        boundary = [
            e
            for t in bad
            for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))
            if count[(min(e), max(e))] == 1
        ]
        triangles.difference_update(bad)
        for a, b in boundary:
            triangles.add((a, b, i))

    out = []
    for t in triangles:
        if max(t) >= n:
            continue
        k = t.index(min(t))
        out.append(t[k:] + t[:k])
    return sorted(out)


def edges_of(triangles) -> list[tuple[int, int]]:
    es = set()
    for a, b, c in triangles:
        for i, j in ((a, b), (b, c), (c, a)):
            es.add((min(i, j), max(i, j)))
    return sorted(es)


def delaunay(points) -> EdgeStats:
    """Delaunay edges of the ``(x, y)`` centroids with length summary.

    The standard deviation uses the N-1 denominator (0 for a single length).
    """
    xy = points.xy if hasattr(points, "xy") else np.asarray(points, dtype=float)
    tris = triangulate(xy)
    edges = edges_of(tris)
    lengths = np.array([math.dist(xy[i], xy[j]) for i, j in edges])
    std = float(lengths.std(ddof=1)) if len(lengths) > 1 else 0.0
    return EdgeStats(
        edges=tuple(edges),
        lengths=tuple(lengths.tolist()),
        triangles=tuple(tris),
        mean=float(lengths.mean()),
        std=std,
        min=float(lengths.min()),
        max=float(lengths.max()),
    )
