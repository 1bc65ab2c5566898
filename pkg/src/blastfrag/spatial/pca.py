"""Principal axes of the fragment centroid scatter."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import DegenerateError


@dataclass(frozen=True)
class PcaResult:
    v1: tuple[float, float]
    v2: tuple[float, float]
    lambda1: float
    lambda2: float
    var_ratio1: float
    var_ratio2: float
    mean: tuple[float, float]
    covariance: tuple[tuple[float, float], tuple[float, float]]

    @property
    def anisotropy(self) -> float | None:
        """lambda1 / lambda2, or ``None`` for collinear clouds."""
        if self.lambda2 <= 0:
            return None
        return self.lambda1 / self.lambda2


def _orient(vx, vy):
    # v1_x >= 0, ties broken by v1_y >= 0
    if vx < 0 or (vx == 0 and vy < 0):
        return -vx, -vy
    return vx, vy


def eig_sym2(a, b, c):
    """Eigen-decomposition of [[a, b], [b, c]] in closed form.

    Returns ``(lambda1, lambda2, (v1x, v1y))`` with ``lambda1 >= lambda2``.
    Equal eigenvalues give ``v1 = (1, 0)``.
    """
    half_tr = 0.5 * (a + c)
    half_diff = 0.5 * (a - c)
    disc = math.hypot(half_diff, b)
    lam1 = half_tr + disc
    lam2 = half_tr - disc
    if disc <= 1e-15 * max(abs(a), abs(c), abs(b), np.finfo(float).tiny):
        return half_tr, half_tr, (1.0, 0.0)
    # pick the better-conditioned of the two equivalent eigenvector formulas
    if half_diff >= 0:
        vx, vy = lam1 - c, b
    else:
        vx, vy = b, lam1 - a
    n = math.hypot(vx, vy)
    if lam2 < 0 and lam2 > -1e-15 * lam1:
        lam2 = 0.0  # rounding on rank-1 input
    return lam1, lam2, (vx / n, vy / n)


def pca(points) -> PcaResult:
    """PCA of an (n, 2) array or a FragmentCloud's ``(x, y)``.

    Covariance uses the N-1 denominator.  ``v1`` points into the right
    half-plane and ``v2`` is ``v1`` rotated by +90 degrees.
    """
    xy = points.xy if hasattr(points, "xy") else np.asarray(points, dtype=float)
    n = len(xy)
    if n < 2:
        raise DegenerateError(f"PCA needs at least 2 points, got {n}")
    mean = xy.mean(axis=0)
    d = xy - mean
    a = float(d[:, 0] @ d[:, 0]) / (n - 1)
    b = float(d[:, 0] @ d[:, 1]) / (n - 1)
    c = float(d[:, 1] @ d[:, 1]) / (n - 1)
    if a + c <= 0:
        raise DegenerateError("PCA undefined for a cloud with zero variance")
    lam1, lam2, (vx, vy) = eig_sym2(a, b, c)
    vx, vy = _orient(vx, vy)
    total = lam1 + lam2
    return PcaResult(
        v1=(vx, vy),
        v2=(-vy, vx),
        lambda1=lam1,
        lambda2=lam2,
        var_ratio1=lam1 / total,
        var_ratio2=lam2 / total,
        mean=(float(mean[0]), float(mean[1])),
        covariance=((a, b), (b, c)),
    )
