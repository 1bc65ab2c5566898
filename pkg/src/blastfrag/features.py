"""Per-image feature extraction: one cloud in, one FeatureVector out."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .coords import FragmentCloud
from .corpus import FeatureVector
from .exceptions import BlastFragError
from .spatial import delaunay, fit_size_depth, kde, pca, radial_size_correlation, ripley_k
from .spatial.kde import DEFAULT_RESOLUTION, DEFAULT_TOP_K
from .spatial.pointpattern import DEFAULT_RADII

log = logging.getLogger(__name__)


@dataclass
class CloudAnalysis:
    """Feature vector plus the intermediate results the plots need."""

    cloud: FragmentCloud
    feature: FeatureVector
    pca: object = None
    density: object = None
    fit: object = None
    edges: object = None
    k_function: object = None
    warnings: list[str] = field(default_factory=list)


def _attempt(name, fn, warnings):
    try:
        return fn()
    except BlastFragError as exc:
        msg = f"{name}: {exc}"
        warnings.append(msg)
        log.warning(msg)
        return None


def analyze_cloud(
    cloud: FragmentCloud,
    bandwidth="auto",
    resolution=DEFAULT_RESOLUTION,
    top_k=DEFAULT_TOP_K,
    radii=DEFAULT_RADII,
    window="normalized",
) -> CloudAnalysis:
    """Run every per-image statistic; failures become ``None`` fields plus a warning."""
    warnings: list[str] = []
    fv = FeatureVector(
        image_id=cloud.image_id,
        n_fragments=len(cloud),
        width=cloud.width,
        height=cloud.height,
        scale=cloud.scale,
    )
    if len(cloud) == 0:
        warnings.append("no fragments: every statistic is undefined")
        log.warning("%s: no fragments", cloud.image_id)
        return CloudAnalysis(cloud, fv, warnings=warnings)

    areas = cloud.a_norm
    fv.mean_area = float(areas.mean())
    fv.median_area = float(np.median(areas))

    res = CloudAnalysis(cloud, fv, warnings=warnings)
    res.pca = _attempt("pca", lambda: pca(cloud), warnings)
    if res.pca is not None:
        fv.lambda1, fv.lambda2 = res.pca.lambda1, res.pca.lambda2
        fv.var_ratio1, fv.var_ratio2 = res.pca.var_ratio1, res.pca.var_ratio2
        fv.anisotropy = res.pca.anisotropy
        fv.v1 = res.pca.v1

    h = bandwidth if bandwidth not in (None, "auto") else "auto"
    res.density = _attempt("kde", lambda: kde(cloud, h, resolution, top_k), warnings)
    if res.density is not None:
        fv.bandwidth = res.density.bandwidth
        fv.hotspots = tuple((p.x, p.y, p.density) for p in res.density.hotspots)

    res.fit = _attempt("size-depth fit", lambda: fit_size_depth(cloud), warnings)
    if res.fit is not None:
        fv.alpha, fv.beta, fv.r_squared, fv.n_used = (
            res.fit.alpha,
            res.fit.beta,
            res.fit.r_squared,
            res.fit.n_used,
        )

    res.edges = _attempt("delaunay", lambda: delaunay(cloud), warnings)
    if res.edges is not None:
        e = res.edges
        fv.mean_edge, fv.std_edge, fv.min_edge, fv.max_edge = e.mean, e.std, e.min, e.max

    fv.radial_corr = _attempt("radial correlation", lambda: radial_size_correlation(cloud), warnings)
    if radii:
        res.k_function = _attempt("ripley k", lambda: ripley_k(cloud, radii, window), warnings)
        fv.k_function = res.k_function
    return res
