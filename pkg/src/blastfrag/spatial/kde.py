"""Gaussian kernel density on the normalized window and hotspot picking."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import DegenerateError, DomainError

DEFAULT_RESOLUTION = 256
DEFAULT_TOP_K = 3
# used when the automatic rule gives zero (single point or coincident points)
FALLBACK_BANDWIDTH = 0.1


@dataclass(frozen=True)
class Hotspot:
    x: float
    y: float
    density: float


@dataclass(frozen=True)
class DensityField:
    """Density sampled at cell centers of an R x R partition of [-1, 1]².

    ``grid[iy, ix]`` is the density at ``(centers[ix], centers[iy])``; rows run
    bottom to top.
    """

    grid: np.ndarray
    bandwidth: float
    hotspots: tuple[Hotspot, ...]

    @property
    def resolution(self) -> int:
        return self.grid.shape[0]

    @property
    def cell(self) -> float:
        return 2.0 / self.resolution

    @property
    def centers(self) -> np.ndarray:
        return grid_centers(self.resolution)

    def mass(self) -> float:
        """Riemann sum of the density over the window."""
        return float(self.grid.sum() * self.cell**2)


def grid_centers(resolution):
    return -1.0 + (np.arange(resolution) + 0.5) * (2.0 / resolution)


def scott_bandwidth(xy) -> float:
    """N^(-1/6) times the pooled coordinate standard deviation."""
    xy = np.asarray(xy, dtype=float)
    n = len(xy)
    if n < 2:
        return 0.0
    var = xy.var(axis=0, ddof=1)
    return float(n ** (-1.0 / 6.0) * math.sqrt(0.5 * (var[0] + var[1])))


def density_grid(xy, h, resolution=DEFAULT_RESOLUTION) -> np.ndarray:
    """Evaluate the KDE on the cell-center grid.

    The bivariate Gaussian kernel factorizes, so the grid is the product of
    two (n, R) kernel matrices.
    """
    xy = np.asarray(xy, dtype=float)
    c = grid_centers(resolution)
    kx = np.exp(-0.5 * ((c[None, :] - xy[:, 0:1]) / h) ** 2)
    ky = np.exp(-0.5 * ((c[None, :] - xy[:, 1:2]) / h) ** 2)
    return (ky.T @ kx) / (2.0 * math.pi * len(xy) * h * h)


def local_maxima(grid) -> list[tuple[int, int]]:
    """Cells strictly greater than all 8 neighbours (window edges count as -inf)."""
    padded = np.pad(grid, 1, mode="constant", constant_values=-np.inf)
    core = padded[1:-1, 1:-1]
    is_max = core > 0
    rows, cols = grid.shape
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            is_max &= core > padded[1 + dy : 1 + dy + rows, 1 + dx : 1 + dx + cols]
    iy, ix = np.nonzero(is_max)
    return list(zip(iy.tolist(), ix.tolist()))


def pick_hotspots(grid, radius, top_k=DEFAULT_TOP_K) -> tuple[Hotspot, ...]:
    """Top-k local maxima, suppressing any peak within ``radius`` of a stronger one."""
    c = grid_centers(grid.shape[0])
    cand = sorted(local_maxima(grid), key=lambda t: (-grid[t], t))
    picked: list[Hotspot] = []
    for iy, ix in cand:
        x, y = float(c[ix]), float(c[iy])
        if any(math.hypot(x - p.x, y - p.y) <= radius for p in picked):
            continue
        picked.append(Hotspot(x, y, float(grid[iy, ix])))
        if len(picked) == top_k:
            break
    return tuple(picked)


def kde(points, h="auto", resolution=DEFAULT_RESOLUTION, top_k=DEFAULT_TOP_K) -> DensityField:
    """Gaussian KDE of the ``(x, y)`` centroids plus density hotspots.

    ``h="auto"`` (or ``None``) applies Scott's rule; non-max suppression uses
    a radius of ``h``.
    """
    xy = points.xy if hasattr(points, "xy") else np.asarray(points, dtype=float)
    if len(xy) == 0:
        raise DegenerateError("KDE needs at least one point")
    if h is None or h == "auto":
        h = scott_bandwidth(xy)
        if h <= 0:
            h = FALLBACK_BANDWIDTH
    h = float(h)
    if not h > 0:
        raise DomainError(f"bandwidth must be positive, got {h}")
    if resolution < 3:
        raise DomainError("resolution must be at least 3")
    grid = density_grid(xy, h, resolution)
    return DensityField(grid, h, pick_hotspots(grid, h, top_k))
