import csv
import io
import json

import numpy as np
import pytest

from blastfrag.corpus import FeatureVector
from blastfrag.exceptions import DomainError
from blastfrag.ingest import DetectionSet, Instance, serialize_detections
from blastfrag.report import io as rio
from blastfrag.report.cli import main
from blastfrag.report.pipeline import (
    AnalyzeConfig,
    analyze,
    analyze_detection_set,
    corpus_run,
    load_corpus_rows,
    write_corpus,
)
from blastfrag.synth import SceneSpec, generate

REFERENCE_ROWS = [
    ("img1", 128, 0.03474, 0.01521, -3.1977, 0.8337, 0.2138),
    ("img2", 300, 0.01293, 0.00688, -2.8615, 0.8758, 0.1374),
    ("img3", 300, 0.01513, 0.00660, -2.8530, 0.8646, 0.1321),
    ("img4", 284, 0.00873, 0.00478, -2.5470, 0.8812, 0.1124),
]
REFERENCE_CSV = [
    "img1,128,0.03474,0.01521,-3.1977,0.8337,0.2138",
    "img2,300,0.01293,0.00688,-2.8615,0.8758,0.1374",
    "img3,300,0.01513,0.0066,-2.853,0.8646,0.1321",
    "img4,284,0.00873,0.00478,-2.547,0.8812,0.1124",
]


def table_rows(extra=True):
    out = []
    for image_id, n, mean_a, med_a, beta, r2, edge in REFERENCE_ROWS:
        kw = {}
        if extra:
            # arbitrary but distinct values so clustering has something to work with
            kw = dict(var_ratio1=0.5 + n / 1000, radial_corr=beta / 10)
        out.append(FeatureVector(image_id, n, mean_area=mean_a, median_area=med_a, beta=beta, r_squared=r2, mean_edge=edge, **kw))
    return out


def _write(path, sets):
    path.write_text(serialize_detections(sets))
    return path


def test_csv_header_and_table_rows():
    text = rio.features_csv(table_rows(), rio.CSV_COLUMNS[:7])
    lines = text.splitlines()
    assert lines[0] == "image_id,N,mean_area,median_area,beta,r_squared,mean_edge"
    assert lines[1:] == REFERENCE_CSV


def test_csv_values_at_printed_precision():
    rows = list(csv.reader(io.StringIO(rio.features_csv(table_rows()))))
    assert rows[0][:7] == ["image_id", "N", "mean_area", "median_area", "beta", "r_squared", "mean_edge"]
    for got, want in zip(rows[1:], REFERENCE_ROWS):
        assert int(got[1]) == want[1]
        for g, w, digits in zip(got[2:7], want[2:], (5, 5, 4, 4, 4)):
            assert f"{float(g):.{digits}f}" == f"{w:.{digits}f}"


def test_fmt():
    assert rio.fmt(None) == ""
    assert rio.fmt(3) == "3"
    assert rio.fmt(1 / 3) == "0.333333"
    assert rio.fmt(True) == "true"


def test_analyze_determinism(tmp_path):
    src = _write(tmp_path / "in.json", [generate(SceneSpec(n=150, process="clustered", seed=2, image_id="a"))])
    analyze(src, tmp_path / "o1")
    analyze(src, tmp_path / "o2")
    files1 = sorted(p.name for p in (tmp_path / "o1").iterdir())
    assert files1 == sorted(p.name for p in (tmp_path / "o2").iterdir())
    assert "a.features.json" in files1 and "a.heatmap.svg" in files1
    for name in files1:
        assert (tmp_path / "o1" / name).read_bytes() == (tmp_path / "o2" / name).read_bytes()


def test_synth_beta_through_analyze(tmp_path):
    src = _write(tmp_path / "in.json", [generate(SceneSpec(n=300, beta_true=-2.8, seed=0, image_id="b"))])
    analyze(src, tmp_path / "out", AnalyzeConfig(apply_filters=False, plots=()))
    fv = rio.read_feature_file(tmp_path / "out" / "b.features.json")
    assert abs(fv.beta + 2.8) <= 0.15


def test_empty_image_reports_nulls(tmp_path, caplog):
    src = _write(tmp_path / "in.json", [DetectionSet("e", 100, 100)])
    (rep,) = analyze(src, tmp_path / "out")
    doc = json.loads((tmp_path / "out" / "e.features.json").read_text())
    assert doc["n_fragments"] == 0 and doc["beta"] is None and doc["mean_edge"] is None
    assert rep.warnings and rep.plots == {}


def test_empty_file_cli(tmp_path, capsys):
    src = tmp_path / "in.json"
    src.write_text("[]")
    assert main(["analyze", "--input", str(src), "--out-dir", str(tmp_path / "o")]) == 0
    src2 = _write(tmp_path / "in2.json", [DetectionSet("e", 100, 100)])
    assert main(["analyze", "--input", str(src2), "--out-dir", str(tmp_path / "o2")]) == 0
    assert "warning" in capsys.readouterr().err


def test_overlay_geometry():
    ds = generate(SceneSpec(n=200, process="anisotropic", aniso_angle=0, aniso_ratio=9, seed=1))
    rep = analyze_detection_set(ds, AnalyzeConfig(apply_filters=False, plots=()))
    (x0, y0), (x1, y1) = rep.arrow
    assert (x0, y0) == (320.0, 240.0)
    assert x1 - x0 == pytest.approx(96.0, abs=1.0)
    assert len(rep.hotspot_pixels) == len(rep.feature.hotspots)


def test_three_point_delaunay_plot():
    ds = DetectionSet(
        "t", 100, 100,
        instances=(
            Instance((10, 10, 20, 20), 100),
            Instance((70, 15, 80, 25), 100),
            Instance((40, 70, 50, 80), 100),
        ),
    )
    rep = analyze_detection_set(ds, AnalyzeConfig(apply_filters=False))
    assert rep.plots["delaunay"].count('class="edge"') == 3


def test_two_cluster_heatmap_hotspots():
    spec = SceneSpec(n=300, process="clustered", centers=((-0.5, 0.1), (0.5, -0.1)), spread=0.01, seed=3)
    rep = analyze_detection_set(generate(spec), AnalyzeConfig(apply_filters=False, top_k=2))
    assert rep.plots["heatmap"].count('class="hotspot"') == 2


def test_plot_byte_identity():
    spec = SceneSpec(n=100, seed=9)
    a = analyze_detection_set(generate(spec)).plots
    b = analyze_detection_set(generate(spec)).plots
    assert a == b


def test_metric_plots_need_scale():
    ds = generate(SceneSpec(n=50, seed=1))
    rep = analyze_detection_set(ds, AnalyzeConfig(plots=("elevation", "size")))
    assert rep.plots == {} and len(rep.warnings) >= 2
    rep = analyze_detection_set(ds, AnalyzeConfig(scale=0.01, plots=("elevation", "size")))
    assert set(rep.plots) == {"elevation", "size"}


class TestCorpus:
    def test_reference_summary_sorted(self):
        rep = corpus_run(table_rows(), k=2, sort_by_beta=True)
        lines = rep.summary.splitlines()
        assert lines[0].startswith("image_id,beta,anisotropy,mean_edge,peak_x,peak_y,r_squared")
        assert [ln.split(",")[0] for ln in lines[1:]] == ["img1", "img2", "img3", "img4"]
        unsorted = corpus_run(list(reversed(table_rows())), k=2).summary.splitlines()
        assert [ln.split(",")[0] for ln in unsorted[1:]] == ["img4", "img3", "img2", "img1"]

    def test_identical_rows(self):
        rows = [FeatureVector(f"i{i}", 50, beta=-2.8, var_ratio1=0.6, mean_edge=0.1, radial_corr=0.0) for i in range(4)]
        rep = corpus_run(rows, k=2)
        assert (rep.matrix.normalized == 0).all()
        assert not rep.matrix.outlier_flags.any()

    def test_planted_groups(self):
        rows = []
        for i in range(10):
            proc = "clustered" if i < 5 else "poisson"
            ds = generate(SceneSpec(n=200, process=proc, spread=0.04, seed=i, image_id=f"g{i}"))
            rows.append(analyze_detection_set(ds, AnalyzeConfig(apply_filters=False, plots=(), radii=())).feature)
        labels = corpus_run(rows, k=2, seed=0).matrix.labels
        assert len(set(labels[:5])) == 1 and len(set(labels[5:])) == 1 and labels[0] != labels[5]

    def test_too_few_rows(self):
        with pytest.raises(DomainError):
            corpus_run(table_rows()[:1])

    def test_k_reduced(self):
        rep = corpus_run(table_rows(), k=10)
        assert rep.warnings and len(set(rep.matrix.labels)) == 4

    def test_lossless_round_trip(self, tmp_path):
        rows = []
        for i in range(3):
            ds = generate(SceneSpec(n=120, seed=i, image_id=f"r{i}"))
            rows.append(analyze_detection_set(ds, AnalyzeConfig(plots=())).feature)
        paths = []
        for fv in rows:
            p = tmp_path / f"{fv.image_id}.features.json"
            rio.write_atomic(p, rio.feature_json(fv))
            paths.append(p)
        loaded = [rio.read_feature_file(p) for p in paths]
        assert loaded == rows
        rep = corpus_run(loaded, k=2)
        write_corpus(rep, tmp_path / "c")
        assert load_corpus_rows(tmp_path / "c" / "corpus.json") == rows

    def test_param_regression(self):
        rows = []
        for i in range(10):
            ds = generate(SceneSpec(n=150, beta_true=-3.2 + 0.07 * i, seed=i, image_id=f"p{i}"))
            rows.append(analyze_detection_set(ds, AnalyzeConfig(plots=(), radii=())).feature)
        params = {fv.image_id: {"P": 2.0 * fv.beta + 1.0} for fv in rows}
        rep = corpus_run(rows, params, k=2, features=("beta", "mean_edge"))
        reg = rep.regressions["P"]
        assert reg.r_squared == pytest.approx(1.0)
        assert reg.gamma == pytest.approx((2.0, 0.0), abs=1e-8)


class TestCli:
    def test_synth_analyze_corpus(self, tmp_path, capsys):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps([{"n": 120, "image_id": f"s{i}"} for i in range(4)]))
        det = tmp_path / "det.json"
        assert main(["synth", "--spec", str(spec), "--out", str(det), "--seed", "5"]) == 0
        out = tmp_path / "a"
        assert main(["analyze", "--input", str(det), "--out-dir", str(out), "--plots", "heatmap,pca"]) == 0
        assert sorted(p.name for p in out.glob("s0.*")) == ["s0.features.json", "s0.heatmap.svg", "s0.pca.svg"]
        params = tmp_path / "params.csv"
        params.write_text("image_id,P\n" + "".join(f"s{i},{i}\n" for i in range(4)))
        code = main(["corpus", "--features", str(out / "*.features.json"), "--params", str(params),
                     "--k", "2", "--out-dir", str(tmp_path / "c"), "--select", "beta"])
        assert code == 0
        assert capsys.readouterr().out.startswith("image_id,beta")
        doc = json.loads((tmp_path / "c" / "corpus.json").read_text())
        assert "P" in doc["regressions"]

    def test_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as e:
            main(["analyze", "--out-dir", str(tmp_path)])
        assert e.value.code == 1
        with pytest.raises(SystemExit) as e:
            main(["analyze", "--input", "x", "--out-dir", "y", "--plots", "bogus"])
        assert e.value.code == 1

    def test_parse_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('[{"image_id": "a", "width": 10}]')
        assert main(["analyze", "--input", str(bad), "--out-dir", str(tmp_path / "o")]) == 2
        assert "height" in capsys.readouterr().err

    def test_validation_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('[{"image_id": "a", "width": 10, "height": 10, "instances": '
                       '[{"bbox": [5, 5, 2, 8], "mask_area": 3}]}]')
        assert main(["analyze", "--input", str(bad), "--out-dir", str(tmp_path / "o")]) == 2

    def test_corpus_single_file(self, tmp_path):
        p = tmp_path / "a.features.json"
        rio.write_atomic(p, rio.feature_json(table_rows()[0]))
        assert main(["corpus", "--features", str(p), "--out-dir", str(tmp_path / "c")]) == 1

    def test_parallel_jobs(self, tmp_path):
        inputs = []
        for i in range(2):
            inputs.append(str(_write(tmp_path / f"in{i}.json", [generate(SceneSpec(n=60, seed=i, image_id="x"))])))
        assert main(["analyze", "--input", *inputs, "--out-dir", str(tmp_path / "o"), "--plots", "none", "--jobs", "2"]) == 0
        a = (tmp_path / "o" / "in0" / "x.features.json").read_text()
        b = (tmp_path / "o" / "in1" / "x.features.json").read_text()
        assert a != b


def test_read_params_json(tmp_path):
    p = tmp_path / "p.json"
    p.write_text('{"a": 1.5, "b": {"P": 2, "Q": 3}}')
    assert rio.read_params(p) == {"a": {"P": 1.5}, "b": {"P": 2.0, "Q": 3.0}}


def test_written_files_mode(tmp_path):
    p = tmp_path / "f.txt"
    rio.write_atomic(p, "x")
    assert p.stat().st_mode & 0o777 == 0o644
    assert not list(tmp_path.glob(".*tmp"))
