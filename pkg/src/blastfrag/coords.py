"""Relative 3D fragment coordinates built from detections.

Every fragment becomes a point ``(x, y, z)`` with ``x, y`` the bbox center
mapped to ``[-1, 1]`` (y pointing up) and ``z`` an inverse-square-root area
depth proxy, max-normalized within the image so the farthest fragment sits at
``z = 1``.  The size feature ``s`` is the bbox diagonal in image-fraction
units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateError, DomainError, UnsupportedOperationError
from .ingest import DetectionSet

DEFAULT_EPSILON = 1e-9


@dataclass(frozen=True)
class FragmentPoint:
    x: float
    y: float
    z: float
    s: float
    a_norm: float
    u: float
    v: float
    width_norm: float
    height_norm: float
    a_real: float | None = None


@dataclass(frozen=True)
class FragmentCloud:
    image_id: str
    points: tuple[FragmentPoint, ...]
    width: float
    height: float
    epsilon: float = DEFAULT_EPSILON
    scale: float | None = None
    degenerate: bool = False

    def __len__(self):
        return len(self.points)

    def _column(self, name):
        return np.array([getattr(p, name) for p in self.points], dtype=float)

    @property
    def xy(self) -> np.ndarray:
        """(n, 2) array of normalized centroids."""
        if not self.points:
            return np.empty((0, 2))
        return np.column_stack([self._column("x"), self._column("y")])

    @property
    def z(self) -> np.ndarray:
        return self._column("z")

    @property
    def s(self) -> np.ndarray:
        return self._column("s")

    @property
    def a_norm(self) -> np.ndarray:
        return self._column("a_norm")

    def metric_xy(self) -> np.ndarray:
        """Centroids in meters, origin at the image's top-left corner."""
        if self.scale is None:
            raise UnsupportedOperationError("cloud carries no metric scale")
        return np.column_stack(
            [self._column("u") * self.width * self.scale, self._column("v") * self.height * self.scale]
        )


def build_cloud(ds: DetectionSet, epsilon: float = DEFAULT_EPSILON) -> FragmentCloud:
    """Convert a detection set into a :class:`FragmentCloud`.

    An empty detection set yields a cloud flagged ``degenerate``.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    W, H = float(ds.width), float(ds.height)
    if not ds.instances:
        return FragmentCloud(ds.image_id, (), W, H, epsilon, ds.scale, degenerate=True)

    boxes = np.array([inst.bbox for inst in ds.instances], dtype=float)
    areas = np.array([inst.mask_area for inst in ds.instances], dtype=float)
    x1, y1, x2, y2 = boxes.T

    u = (x1 + x2) / (2.0 * W)
    v = (y1 + y2) / (2.0 * H)
    a_norm = areas / (W * H)
    x = 2.0 * u - 1.0
    y = 1.0 - 2.0 * v
    w = 1.0 / np.sqrt(a_norm + epsilon)
    z = w / w.max()
    bw = (x2 - x1) / W
    bh = (y2 - y1) / H
    s = np.sqrt(bw**2 + bh**2)
    a_real = areas * ds.scale**2 if ds.scale is not None else [None] * len(areas)

    points = tuple(
        FragmentPoint(
            x=float(x[i]),
            y=float(y[i]),
            z=float(z[i]),
            s=float(s[i]),
            a_norm=float(a_norm[i]),
            u=float(u[i]),
            v=float(v[i]),
            width_norm=float(bw[i]),
            height_norm=float(bh[i]),
            a_real=None if a_real[i] is None else float(a_real[i]),
        )
        for i in range(len(areas))
    )
    return FragmentCloud(ds.image_id, points, W, H, epsilon, ds.scale)


def require_points(cloud: FragmentCloud, n: int, what: str):
    if len(cloud) < n:
        raise DegenerateError(f"{what} needs at least {n} fragments, got {len(cloud)}")


def _need_scale(scale):
    if scale is None:
        raise UnsupportedOperationError("metric conversion needs a scale (m/px)")
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale}")


def elevation_m(p: FragmentPoint, height: float, scale: float | None) -> float:
    """Height of the bbox center above the bottom image edge, in meters."""
    _need_scale(scale)
    return (1.0 - p.v) * height * scale


def size_m(p: FragmentPoint, width: float, height: float, scale: float | None, method="diagonal") -> float:
    """Metric fragment size.

    ``method="diagonal"`` is the bbox diagonal in meters; ``"circle"`` is the
    diameter of the circle with the same metric mask area.
    """
    _need_scale(scale)
    if method == "diagonal":
        return math.hypot(p.width_norm * width * scale, p.height_norm * height * scale)
    if method == "circle":
        area = p.a_norm * width * height * scale**2
        return 2.0 * math.sqrt(area / math.pi)
    raise DomainError(f"unknown size method {method!r}")
