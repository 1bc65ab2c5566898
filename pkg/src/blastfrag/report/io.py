"""Feature files, CSV tables and the blast-parameter sidecar."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

from ..corpus import TABLE_COLUMNS, FeatureVector
from ..exceptions import ParseError

EXTENDED_COLUMNS = (
    "alpha",
    "var_ratio1",
    "anisotropy",
    "std_edge",
    "min_edge",
    "max_edge",
    "radial_corr",
    "v1_x",
    "v1_y",
    "hotspot1_x",
    "hotspot1_y",
    "hotspot1_density",
    "hotspot2_x",
    "hotspot2_y",
    "hotspot2_density",
    "hotspot3_x",
    "hotspot3_y",
    "hotspot3_density",
)
CSV_COLUMNS = TABLE_COLUMNS + EXTENDED_COLUMNS
SUMMARY_COLUMNS = ("image_id", "beta", "anisotropy", "mean_edge", "peak_x", "peak_y", "r_squared", "cluster", "outlier")


def fmt(value) -> str:
    """CSV cell: integers as-is, floats to 6 significant digits, None empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def _cell(fv: FeatureVector, col):
    if col == "N":
        return fv.n_fragments
    if col in ("v1_x", "v1_y"):
        return None if fv.v1 is None else fv.v1[0 if col == "v1_x" else 1]
    if col.startswith("hotspot"):
        k = int(col[7]) - 1
        if k >= len(fv.hotspots):
            return None
        return fv.hotspots[k][{"x": 0, "y": 1, "density": 2}[col.split("_", 1)[1]]]
    return getattr(fv, col)


def csv_row(fv: FeatureVector, columns=CSV_COLUMNS) -> list[str]:
    return [fmt(_cell(fv, c)) for c in columns]


def features_csv(rows, columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for fv in rows:
        w.writerow(csv_row(fv, columns))
    return buf.getvalue()


def summary_csv(rows, labels=None, flags=None, sort_by_beta=False) -> str:
    """The headline per-image metrics: beta, anisotropy, mean edge, top hotspot, R²."""
    order = list(range(len(rows)))
    if sort_by_beta:
        order.sort(key=lambda i: (rows[i].beta is None, rows[i].beta if rows[i].beta is not None else 0.0, i))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for i in order:
        fv = rows[i]
        peak = fv.hotspots[0] if fv.hotspots else (None, None)
        w.writerow(
            [
                fv.image_id,
                fmt(fv.beta),
                fmt(fv.anisotropy),
                fmt(fv.mean_edge),
                fmt(peak[0]),
                fmt(peak[1]),
                fmt(fv.r_squared),
                "" if labels is None else str(int(labels[i])),
                "" if flags is None else fmt(bool(flags[i])),
            ]
        )
    return buf.getvalue()


def feature_json(fv: FeatureVector) -> str:
    return json.dumps(fv.to_dict(), indent=2, allow_nan=False) + "\n"


def read_feature_file(path) -> FeatureVector:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return FeatureVector.from_dict(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ParseError(f"{path}: not a feature file ({exc})") from None


def read_params(path) -> dict[str, dict[str, float]]:
    """Blast-parameter sidecar: CSV with an ``image_id`` column, or JSON ``{image_id: {name: value}}``."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno) from None
        out = {}
        for key, val in doc.items():
            if isinstance(val, dict):
                out[str(key)] = {k: float(v) for k, v in val.items()}
            else:
                out[str(key)] = {"P": float(val)}
        return out
    reader = csv.DictReader(io.StringIO(text))
    if not reader.fieldnames or "image_id" not in reader.fieldnames:
        raise ParseError("parameter file needs an image_id column", line=1)
    out = {}
    for lineno, rec in enumerate(reader, start=2):
        try:
            out[rec["image_id"]] = {k: float(v) for k, v in rec.items() if k != "image_id" and v not in ("", None)}
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    return out


def write_atomic(path, text: str):
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
