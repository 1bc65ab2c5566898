"""Spatial statistics for post-blast rock fragment detections."""

from .coords import FragmentCloud, FragmentPoint, build_cloud, elevation_m, size_m
from .exceptions import (
    BlastFragError,
    DegenerateError,
    DomainError,
    ParseError,
    UnsupportedOperationError,
    ValidationError,
)
from .ingest import (
    DetectionSet,
    FilterConfig,
    Instance,
    dbscan_centroids,
    filter_geometric,
    parse_detections,
    pixel_area_to_metric,
    serialize_detections,
)

__version__ = "0.1.0"
