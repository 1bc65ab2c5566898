"""Second-order and radial statistics of the centroid pattern."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from ..exceptions import DegenerateError, DomainError, UnsupportedOperationError

NORMALIZED_WINDOW_AREA = 4.0
DEFAULT_RADII = tuple(round(0.05 * k, 2) for k in range(1, 11))


@dataclass(frozen=True)
class KFunction:
    radii: tuple[float, ...]
    k_observed: tuple[float, ...]
    k_poisson: tuple[float, ...]
    window_area: float
    window: str = "normalized"


def k_estimate(xy, radii, area) -> np.ndarray:
    """Uncorrected Ripley estimator |A| / (N(N-1)) * #{ordered pairs with d <= r}."""
    xy = np.asarray(xy, dtype=float)
    n = len(xy)
    if n < 2:
        raise DegenerateError(f"K-function needs at least 2 points, got {n}")
    radii = np.asarray(radii, dtype=float)
    d = np.sort(pdist(xy))
    pairs = 2 * np.searchsorted(d, radii, side="right")
    k = area * pairs / (n * (n - 1))
    return np.where(radii > 0, k, 0.0)


def ripley_k(cloud, radii=DEFAULT_RADII, window="normalized") -> KFunction:
    """Ripley's K for a FragmentCloud, without edge correction.

    ``window="normalized"`` uses the [-1, 1]² square (area 4).
    ``window="metric"`` works in meters over the W·s by H·s image footprint
    and needs the cloud to carry a scale.
    """
    radii = tuple(float(r) for r in radii)
    if not radii:
        raise DomainError("at least one radius is required")
    if any(r < 0 for r in radii) or any(b < a for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must be non-negative and ascending")
    if window == "normalized":
        xy, area = cloud.xy, NORMALIZED_WINDOW_AREA
    elif window == "metric":
        if cloud.scale is None:
            raise UnsupportedOperationError("metric window needs a scale")
        xy = cloud.metric_xy()
        area = cloud.width * cloud.scale * cloud.height * cloud.scale
    else:
        raise DomainError(f"unknown window {window!r}")
    k = k_estimate(xy, radii, area)
    return KFunction(
        radii=radii,
        k_observed=tuple(k.tolist()),
        k_poisson=tuple(math.pi * r * r for r in radii),
        window_area=float(area),
        window=window,
    )


def radial_size_correlation(cloud_or_xy, s=None) -> float:
    """Pearson correlation between distance from the centroid and size."""
    if s is None:
        xy, s = cloud_or_xy.xy, cloud_or_xy.s
    else:
        xy, s = np.asarray(cloud_or_xy, dtype=float), np.asarray(s, dtype=float)
    if len(xy) < 3:
        raise DegenerateError(f"correlation needs at least 3 points, got {len(xy)}")
    d = np.hypot(*(xy - xy.mean(axis=0)).T)
    dd = d - d.mean()
    ds = s - s.mean()
    sdd, sds = float(dd @ dd), float(ds @ ds)
    if np.ptp(d) == 0 or sdd == 0:
        raise DegenerateError("radial distances have zero variance")
    if np.ptp(s) == 0 or sds == 0:
        raise DegenerateError("sizes have zero variance")
    r = float(dd @ ds) / math.sqrt(sdd * sds)
    return max(-1.0, min(1.0, r))


def clark_evans(xy, area) -> float:
    """Mean nearest-neighbour distance over its CSR expectation 0.5/sqrt(density)."""
    xy = np.asarray(xy, dtype=float)
    n = len(xy)
    if n < 2:
        raise DegenerateError("Clark-Evans index needs at least 2 points")
    diff = xy[:, None, :] - xy[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(d, np.inf)
    return float(d.min(axis=1).mean() / (0.5 / math.sqrt(n / area)))
