"""Detection-file parsing, metric conversion and post-processing filters.

A detection file is a UTF-8 JSON document whose top level is a list of image
records::

    [
      {
        "image_id": "bench_07",
        "width": 640,
        "height": 480,
        "scale_m_per_px": 0.004,          # optional
        "instances": [
          {"bbox": [x1, y1, x2, y2], "mask_area": 1362, "confidence": 0.91}
        ]
      }
    ]

Missing required fields are rejected; unknown extra fields are ignored.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.cluster import DBSCAN

from .exceptions import DomainError, ParseError, ValidationError

NOISE = -1


@dataclass(frozen=True)
class Instance:
    bbox: tuple[float, float, float, float]
    mask_area: float
    confidence: float = 1.0

    @property
    def box_width(self) -> float:
        return self.bbox[2] - self.bbox[0]

    @property
    def box_height(self) -> float:
        return self.bbox[3] - self.bbox[1]

    @property
    def aspect(self) -> float:
        return self.box_width / self.box_height


@dataclass(frozen=True)
class DetectionSet:
    image_id: str
    width: float
    height: float
    scale: float | None = None
    instances: tuple[Instance, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))

    def __len__(self):
        return len(self.instances)

    def validate(self, image_index=None):
        """Raise :class:`ValidationError` on the first broken invariant."""
        if not (self.width > 0 and self.height > 0):
            raise ValidationError(
                f"image {self.image_id!r}: width and height must be positive",
                image_index=image_index,
            )
        if self.scale is not None and not self.scale > 0:
            raise ValidationError(
                f"image {self.image_id!r}: scale must be positive", image_index=image_index
            )
        for k, inst in enumerate(self.instances):
            _validate_instance(inst, self.width, self.height, k, image_index)
        return self


def _validate_instance(inst, width, height, k, image_index):
    def fail(why):
        raise ValidationError(f"instance {k}: {why}", image_index=image_index, instance_index=k)

    x1, y1, x2, y2 = inst.bbox
    if not all(math.isfinite(c) for c in inst.bbox):
        fail("bbox coordinates must be finite")
    if not x1 < x2:
        fail(f"x1 < x2 violated ({x1} >= {x2})")
    if not y1 < y2:
        fail(f"y1 < y2 violated ({y1} >= {y2})")
    if x1 < 0 or y1 < 0 or x2 > width or y2 > height:
        fail(f"bbox {inst.bbox} outside image [0, {width}]x[0, {height}]")
    if not (inst.mask_area > 0 and math.isfinite(inst.mask_area)):
        fail("mask_area must be positive")
    if inst.mask_area > width * height:
        fail(f"mask_area {inst.mask_area} exceeds image area {width * height}")
    if not 0.0 <= inst.confidence <= 1.0:
        fail(f"confidence {inst.confidence} outside [0, 1]")


@dataclass(frozen=True)
class FilterConfig:
    """Post-processing thresholds.

    ``max_area`` of ``None`` means a quarter of the image area, resolved per
    image.
    """

    min_area: float = 25.0
    max_area: float | None = None
    min_aspect: float = 0.1
    max_aspect: float = 10.0
    dbscan_eps: float = 0.05
    dbscan_min_pts: int = 2
    confidence_floor: float = 0.25

    def __post_init__(self):
        if self.max_area is not None and self.min_area > self.max_area:
            raise DomainError("min_area must not exceed max_area")
        if self.min_aspect > self.max_aspect:
            raise DomainError("min_aspect must not exceed max_aspect")
        if not self.dbscan_eps > 0:
            raise DomainError("dbscan_eps must be positive")
        if self.dbscan_min_pts < 1:
            raise DomainError("dbscan_min_pts must be >= 1")


# -- parsing -----------------------------------------------------------------

_IMAGE_FIELDS = ("image_id", "width", "height", "instances")
_INSTANCE_FIELDS = ("bbox", "mask_area", "confidence")


def _line_of(text, needle_pos):
    return text.count("\n", 0, needle_pos) + 1


def _number(value, fieldname, line):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {value!r}", line=line, field=fieldname)
    return float(value)


def _image_lines(text, n_images):
    """Best-effort line number of each top-level image record."""
    lines = []
    pos = 0
    for _ in range(n_images):
        pos = text.find('"image_id"', pos)
        if pos < 0:
            lines.append(None)
            continue
        lines.append(_line_of(text, pos))
        pos += 1
    return lines


def parse_detections(data: bytes | str) -> list[DetectionSet]:
    """Parse a detection file into validated :class:`DetectionSet` objects.

    Raises :class:`ParseError` for malformed JSON or schema problems (with line
    and field context) and :class:`ValidationError` for invariant violations.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc}") from None
    else:
        text = data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, list):
        raise ParseError("top level must be a list of image records", line=1)

    lines = _image_lines(text, len(doc))
    out = []
    for i, rec in enumerate(doc):
        line = lines[i]
        if not isinstance(rec, dict):
            raise ParseError(f"image record {i} is not an object", line=line)
        for name in _IMAGE_FIELDS:
            if name not in rec:
                raise ParseError(f"image record {i} missing required field", line=line, field=name)
        width = _number(rec["width"], "width", line)
        height = _number(rec["height"], "height", line)
        scale = rec.get("scale_m_per_px")
        if scale is not None:
            scale = _number(scale, "scale_m_per_px", line)
        raw = rec["instances"]
        if not isinstance(raw, list):
            raise ParseError(f"image record {i}: instances must be a list", line=line, field="instances")
        instances = []
        for k, item in enumerate(raw):
            where = f"instances[{k}]"
            if not isinstance(item, dict):
                raise ParseError(f"image record {i}: {where} is not an object", line=line, field=where)
            for name in _INSTANCE_FIELDS:
                if name not in item:
                    raise ParseError(
                        f"image record {i}: {where} missing required field",
                        line=line,
                        field=f"{where}.{name}",
                    )
            bbox = item["bbox"]
            if not isinstance(bbox, list) or len(bbox) != 4:
                raise ParseError(
                    f"image record {i}: bbox must be [x1, y1, x2, y2]", line=line, field=f"{where}.bbox"
                )
            bbox = tuple(_number(c, f"{where}.bbox", line) for c in bbox)
            instances.append(
                Instance(
                    bbox=bbox,
                    mask_area=_number(item["mask_area"], f"{where}.mask_area", line),
                    confidence=_number(item["confidence"], f"{where}.confidence", line),
                )
            )
        ds = DetectionSet(str(rec["image_id"]), width, height, scale, tuple(instances))
        ds.validate(image_index=i)
        out.append(ds)
    return out


def _plain(v):
    # keep integral values integral so files written by hand survive a round trip
    if float(v).is_integer() and abs(v) < 2**53:
        return int(v)
    return float(v)


def detection_set_to_dict(ds: DetectionSet) -> dict:
    rec = {"image_id": ds.image_id, "width": _plain(ds.width), "height": _plain(ds.height)}
    if ds.scale is not None:
        rec["scale_m_per_px"] = ds.scale
    rec["instances"] = [
        {
            "bbox": [_plain(c) for c in inst.bbox],
            "mask_area": _plain(inst.mask_area),
            "confidence": inst.confidence,
        }
        for inst in ds.instances
    ]
    return rec


def serialize_detections(sets) -> str:
    """Inverse of :func:`parse_detections`."""
    if isinstance(sets, DetectionSet):
        sets = [sets]
    return json.dumps([detection_set_to_dict(ds) for ds in sets], indent=1) + "\n"


# -- conversion and filters --------------------------------------------------


def pixel_area_to_metric(area_px, scale):
    """Convert an area in px² to m² given a scale in m/px."""
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale}")
    return area_px * scale**2


def _keep(inst, cfg, max_area):
    return (
        inst.confidence >= cfg.confidence_floor
        and cfg.min_area <= inst.mask_area <= max_area
        and cfg.min_aspect <= inst.aspect <= cfg.max_aspect
    )


def filter_geometric(ds: DetectionSet, cfg: FilterConfig | None = None) -> DetectionSet:
    """Drop low-confidence instances and those outside the area/aspect bounds.

    All bounds are inclusive; the surviving instances keep their order.
    """
    cfg = cfg or FilterConfig()
    max_area = cfg.max_area if cfg.max_area is not None else 0.25 * ds.width * ds.height
    return replace(ds, instances=tuple(i for i in ds.instances if _keep(i, cfg, max_area)))


def normalized_centroids(ds: DetectionSet) -> np.ndarray:
    """Bounding-box centers as (u, v) in the unit square, shape (n, 2)."""
    if not ds.instances:
        return np.empty((0, 2))
    boxes = np.array([inst.bbox for inst in ds.instances], dtype=float)
    u = (boxes[:, 0] + boxes[:, 2]) / (2.0 * ds.width)
    v = (boxes[:, 1] + boxes[:, 3]) / (2.0 * ds.height)
    return np.column_stack([u, v])


def dbscan_centroids(ds: DetectionSet, eps=0.05, min_pts=2):
    """DBSCAN on normalized bbox centers.

    Returns ``(labels, filtered)`` where ``labels[i]`` is a cluster id or
    ``NOISE`` (-1) and ``filtered`` keeps only non-noise instances.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    if min_pts < 1:
        raise DomainError("min_pts must be >= 1")
    if not ds.instances:
        return np.empty(0, dtype=int), ds
    labels = DBSCAN(eps=eps, min_samples=min_pts, metric="euclidean").fit_predict(
        normalized_centroids(ds)
    )
    kept = tuple(inst for inst, lab in zip(ds.instances, labels) if lab != NOISE)
    return labels.astype(int), replace(ds, instances=kept)


def clean(ds: DetectionSet, cfg: FilterConfig | None = None) -> DetectionSet:
    """Geometric filter followed by DBSCAN noise removal."""
    cfg = cfg or FilterConfig()
    ds = filter_geometric(ds, cfg)
    _, ds = dbscan_centroids(ds, cfg.dbscan_eps, cfg.dbscan_min_pts)
    return ds
