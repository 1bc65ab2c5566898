"""Per-image spatial statistics of a fragment cloud."""

from .delaunay import EdgeStats, delaunay, triangulate
from .kde import DensityField, Hotspot, kde, scott_bandwidth
from .overlay import principal_arrow, to_pixels
from .pca import PcaResult, pca
from .pointpattern import KFunction, clark_evans, radial_size_correlation, ripley_k
from .regression import RegressionFit, fit_size_depth

__all__ = [
    "DensityField",
    "EdgeStats",
    "Hotspot",
    "KFunction",
    "PcaResult",
    "RegressionFit",
    "clark_evans",
    "delaunay",
    "fit_size_depth",
    "kde",
    "pca",
    "principal_arrow",
    "radial_size_correlation",
    "ripley_k",
    "scott_bandwidth",
    "to_pixels",
    "triangulate",
]
