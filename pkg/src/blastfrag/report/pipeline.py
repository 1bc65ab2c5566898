"""End-to-end runs: per-image analysis and corpus aggregation."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .. import corpus
from ..coords import DEFAULT_EPSILON, build_cloud
from ..exceptions import BlastFragError, DomainError
from ..features import CloudAnalysis, analyze_cloud
from ..ingest import DetectionSet, FilterConfig, clean, parse_detections
from ..spatial.kde import DEFAULT_RESOLUTION, DEFAULT_TOP_K
from ..spatial.overlay import principal_arrow, to_pixels
from ..spatial.pointpattern import DEFAULT_RADII
from . import io as rio
from .svg import PANELS

log = logging.getLogger(__name__)


@dataclass
class AnalyzeConfig:
    scale: float | None = None
    bandwidth: float | str = "auto"
    top_k: int = DEFAULT_TOP_K
    epsilon: float = DEFAULT_EPSILON
    resolution: int = DEFAULT_RESOLUTION
    radii: tuple[float, ...] = DEFAULT_RADII
    window: str = "normalized"
    plots: tuple[str, ...] = tuple(PANELS)
    apply_filters: bool = True
    filters: FilterConfig = field(default_factory=FilterConfig)
    arrow_length: float | None = None


@dataclass
class AnalysisReport:
    feature: corpus.FeatureVector
    arrow: tuple[tuple[float, float], tuple[float, float]] | None
    hotspot_pixels: tuple[tuple[float, float], ...]
    plots: dict[str, str]
    warnings: list[str]
    analysis: CloudAnalysis | None = None


def safe_name(image_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", image_id) or "image"


def render_plots(analysis: CloudAnalysis, selection=tuple(PANELS), arrow_length=None):
    """Render the selected panels; panels whose statistic is missing are skipped with a warning."""
    plots, warnings = {}, []
    for name in selection:
        if name not in PANELS:
            raise DomainError(f"unknown plot {name!r}; choose from {', '.join(PANELS)}")
        fn, needs, metric = PANELS[name]
        if len(analysis.cloud) == 0:
            warnings.append(f"plot {name} omitted: empty cloud")
            continue
        if needs is not None and getattr(analysis, needs) is None:
            warnings.append(f"plot {name} omitted: {needs} undefined")
            continue
        if metric and analysis.cloud.scale is None:
            warnings.append(f"plot {name} omitted: no metric scale")
            continue
        plots[name] = fn(analysis, arrow_length) if name == "overlay" else fn(analysis)
    for w in warnings:
        log.warning("%s: %s", analysis.cloud.image_id, w)
    return plots, warnings


def analyze_detection_set(ds: DetectionSet, config: AnalyzeConfig | None = None) -> AnalysisReport:
    config = config or AnalyzeConfig()
    if config.scale is not None:
        ds = DetectionSet(ds.image_id, ds.width, ds.height, config.scale, ds.instances)
    if config.apply_filters:
        ds = clean(ds, config.filters)
    cloud = build_cloud(ds, config.epsilon)
    window = config.window
    warnings = []
    if window == "metric" and cloud.scale is None:
        warnings.append("metric K-function window requested without a scale; using normalized window")
        window = "normalized"
    res = analyze_cloud(cloud, config.bandwidth, config.resolution, config.top_k, config.radii, window)
    plots, plot_warn = render_plots(res, config.plots, config.arrow_length)

    arrow = None
    if res.pca is not None:
        L = config.arrow_length if config.arrow_length is not None else 0.2 * min(ds.width, ds.height)
        arrow = principal_arrow(ds.width, ds.height, res.pca.v1, L)
    hot_px = tuple(to_pixels(x, y, ds.width, ds.height) for x, y, _ in res.feature.hotspots)
    return AnalysisReport(res.feature, arrow, hot_px, plots, warnings + res.warnings + plot_warn, res)


def analyze(input_path, out_dir, config: AnalyzeConfig | None = None) -> list[AnalysisReport]:
    """Analyze every image of a detection file and write its outputs to ``out_dir``.

    Writes ``<image>.features.json``, ``<image>.<panel>.svg`` and a
    ``features.csv`` with one row per image.
    """
    config = config or AnalyzeConfig()
    sets = parse_detections(Path(input_path).read_bytes())
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not sets:
        log.warning("%s: detection file lists no images", input_path)
    reports = []
    for ds in sets:
        rep = analyze_detection_set(ds, config)
        stem = safe_name(ds.image_id)
        rio.write_atomic(out / f"{stem}.features.json", rio.feature_json(rep.feature))
        for name, doc in rep.plots.items():
            rio.write_atomic(out / f"{stem}.{name}.svg", doc)
        reports.append(rep)
    rio.write_atomic(out / "features.csv", rio.features_csv([r.feature for r in reports]))
    return reports


@dataclass
class CorpusReport:
    matrix: corpus.CorpusMatrix
    kmeans: corpus.KMeansResult
    regressions: dict[str, corpus.ParamRegression]
    summary: str
    warnings: list[str]

    def to_dict(self) -> dict:
        m = self.matrix
        return {
            "features": list(m.features),
            "image_ids": m.image_ids,
            "mu": m.mu.tolist(),
            "sigma": m.sigma.tolist(),
            "constant": m.constant.tolist(),
            "normalized": m.normalized.tolist(),
            "labels": m.labels.tolist(),
            "centroids": m.centroids.tolist(),
            "outlier_flags": m.outlier_flags.tolist(),
            "objective_history": list(self.kmeans.objective_history),
            "regressions": {
                name: {
                    "gamma0": r.gamma0,
                    "gamma": list(r.gamma),
                    "features": list(r.features),
                    "r_squared": r.r_squared,
                }
                for name, r in self.regressions.items()
            },
            "rows": [fv.to_dict() for fv in m.rows],
            "warnings": self.warnings,
        }


def corpus_run(
    rows,
    params=None,
    k=3,
    seed=0,
    outlier_t=3.0,
    features=corpus.DEFAULT_CLUSTER_FEATURES,
    sort_by_beta=False,
) -> CorpusReport:
    """Normalize, cluster and flag a set of feature vectors; regress blast parameters if given.

    ``k`` larger than the number of images is reduced to that number with a warning.
    """
    rows = list(rows)
    if len(rows) < 2:
        raise DomainError("corpus analysis needs at least 2 feature files")
    warnings = []
    matrix = corpus.normalize(rows, features)
    k_eff = min(k, len(rows))
    if k_eff != k:
        warnings.append(f"k={k} exceeds {len(rows)} images; using k={k_eff}")
    km = corpus.kmeans(matrix, k_eff, seed)
    matrix.labels, matrix.centroids = km.labels, km.centroids
    matrix.outlier_flags = corpus.flag_outliers(matrix, t=outlier_t)

    regressions = {}
    if params:
        ids = matrix.image_ids
        names = sorted({n for v in params.values() for n in v})
        for name in names:
            idx = [i for i, img in enumerate(ids) if name in params.get(img, {})]
            if len(idx) < len(features) + 2:
                warnings.append(f"parameter {name}: {len(idx)} images is too few for {len(features)} features")
                continue
            y = [params[ids[i]][name] for i in idx]
            try:
                regressions[name] = corpus.param_regression(matrix.raw[idx], y, features, name)
            except BlastFragError as exc:
                warnings.append(f"parameter {name}: {exc}")
    for w in warnings:
        log.warning(w)
    summary = rio.summary_csv(rows, matrix.labels, matrix.outlier_flags, sort_by_beta)
    return CorpusReport(matrix, km, regressions, summary, warnings)


def write_corpus(report: CorpusReport, out_dir):
    out = Path(out_dir)
    rio.write_atomic(out / "corpus.json", json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n")
    rio.write_atomic(out / "summary.csv", report.summary)
    rio.write_atomic(out / "features.csv", rio.features_csv(report.matrix.rows))


def load_corpus_rows(path) -> list[corpus.FeatureVector]:
    """Feature vectors stored in a ``corpus.json`` export."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return [corpus.FeatureVector.from_dict(d) for d in doc["rows"]]
