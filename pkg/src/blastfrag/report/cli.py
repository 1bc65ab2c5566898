"""Command-line entry point: ``blastfrag analyze | corpus | synth``."""

from __future__ import annotations

import argparse
import glob
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..exceptions import BlastFragError, ParseError, ValidationError
from ..ingest import serialize_detections
from ..synth import SceneSpec, generate
from . import io as rio
from .pipeline import AnalyzeConfig, analyze, corpus_run, write_corpus
from .svg import PANELS

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("blastfrag")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bandwidth(text):
    if text == "auto":
        return "auto"
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return value


def _radii(text):
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad radius list {text!r}") from None
    if not vals or any(b < a for a, b in zip(vals, vals[1:])) or vals[0] < 0:
        raise argparse.ArgumentTypeError("radii must be non-negative and ascending")
    return vals


def _plots(text):
    if text == "all":
        return tuple(PANELS)
    if text == "none":
        return ()
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = [n for n in names if n not in PANELS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown plots {bad}; choose from {', '.join(PANELS)}")
    return names


def build_parser():
    p = _Parser(prog="blastfrag", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="per-image spatial statistics")
    a.add_argument("--input", required=True, nargs="+", help="detection file(s)")
    a.add_argument("--out-dir", required=True)
    a.add_argument("--scale", type=float, help="m/px, overrides the file")
    a.add_argument("--bandwidth", type=_bandwidth, default="auto")
    a.add_argument("--top-k", type=int, default=3)
    a.add_argument("--epsilon", type=float, default=1e-9)
    a.add_argument("--radii", type=_radii, default=None)
    a.add_argument("--window", choices=("normalized", "metric"), default="normalized")
    a.add_argument("--plots", type=_plots, default=tuple(PANELS))
    a.add_argument("--no-filter", action="store_true", help="skip geometric and DBSCAN filtering")
    a.add_argument("--jobs", type=int, default=1, help="input files processed in parallel")

    c = sub.add_parser("corpus", help="normalize, cluster and report a set of feature files")
    c.add_argument("--features", required=True, nargs="+", help="feature files or glob patterns")
    c.add_argument("--params", help="blast-parameter sidecar (CSV or JSON)")
    c.add_argument("--k", type=int, default=3)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--outlier-t", type=float, default=3.0)
    c.add_argument("--select", help="comma-separated feature names used for clustering")
    c.add_argument("--sort-beta", action="store_true", help="order the summary by ascending beta")
    c.add_argument("--out-dir", default="corpus")

    s = sub.add_parser("synth", help="write a synthetic detection file")
    s.add_argument("--spec", required=True, help="JSON scene spec (object or list of objects)")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    return p


def _analyze_one(path, out_dir, config):
    reports = analyze(path, out_dir, config)
    return [(r.feature.image_id, r.warnings) for r in reports]


def cmd_analyze(args):
    kw = {}
    if args.radii is not None:
        kw["radii"] = args.radii
    config = AnalyzeConfig(
        scale=args.scale,
        bandwidth=args.bandwidth,
        top_k=args.top_k,
        epsilon=args.epsilon,
        window=args.window,
        plots=args.plots,
        apply_filters=not args.no_filter,
        **kw,
    )
    inputs = args.input
    # several inputs share an out-dir only when each gets its own subdirectory
    targets = [Path(args.out_dir) if len(inputs) == 1 else Path(args.out_dir) / Path(p).stem for p in inputs]
    if args.jobs > 1 and len(inputs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_analyze_one, inputs, targets, [config] * len(inputs)))
    else:
        results = [_analyze_one(p, t, config) for p, t in zip(inputs, targets)]
    for per_file in results:
        for image_id, warnings in per_file:
            for w in warnings:
                print(f"warning: {image_id}: {w}", file=sys.stderr)
    return EXIT_OK


def cmd_corpus(args):
    paths = []
    for pattern in args.features:
        hits = sorted(glob.glob(pattern))
        paths.extend(hits if hits else [pattern])
    rows = [rio.read_feature_file(p) for p in paths]
    params = rio.read_params(args.params) if args.params else None
    kw = {}
    if args.select:
        kw["features"] = tuple(t.strip() for t in args.select.split(",") if t.strip())
    report = corpus_run(rows, params, args.k, args.seed, args.outlier_t, sort_by_beta=args.sort_beta, **kw)
    write_corpus(report, args.out_dir)
    sys.stdout.write(report.summary)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def cmd_synth(args):
    try:
        doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    specs = doc if isinstance(doc, list) else [doc]
    sets = []
    for k, d in enumerate(specs):
        d = dict(d)
        if args.seed is not None:
            d["seed"] = args.seed + k
        sets.append(generate(SceneSpec.from_dict(d)))
    rio.write_atomic(args.out, serialize_detections(sets))
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "corpus": cmd_corpus, "synth": cmd_synth}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (BlastFragError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
