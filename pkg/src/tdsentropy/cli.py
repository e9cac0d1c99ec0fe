"""Command-line interface.

Exit codes: 0 success, 1 invalid input data, 2 usage error, 3 I/O error.
Diagnostics go to stderr; data goes to files or stdout.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import re
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from tdsentropy.core import expand_dominance, validate_dataset
from tdsentropy.errors import IngestError, TdsError
from tdsentropy.estimators import (
    DENOMINATORS,
    ESTIMATORS,
    ComplexityCurve,
    EntropyCurve,
    complexity_curve,
    entropy_curve,
)
from tdsentropy.ingest import (
    DatasetManifest,
    RateSeries,
    parse_curve_csv,
    parse_events_csv,
    parse_manifest,
    write_curve_csv,
    write_events_csv,
    write_manifest,
)
from tdsentropy.report import (
    curve_features,
    curve_svg,
    moving_average,
    tds_curves,
)
from tdsentropy.simulate import default_config, generate_dataset, load_config

log = logging.getLogger("tdsentropy")

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

FEATURE_HEADER = ["sample", "first_defined_tau", "h_first", "h_max",
                  "tau_argmax", "h_swallow", "rise_then_fall"]


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    inputs: dict = field(default_factory=dict)   # path -> sha256
    outputs: dict = field(default_factory=dict)  # path relative to --out -> sha256
    warnings: list = field(default_factory=list)
    elapsed_s: float = 0.0
    exit_code: int = EXIT_OK

    def to_json(self) -> str:
        # elapsed time is left out so that reruns are byte-identical
        doc = {"command": self.command, "inputs": self.inputs,
               "outputs": self.outputs, "warnings": self.warnings}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class _Session:
    def __init__(self, command, out=None):
        self.report = RunReport(command)
        self.out = Path(out) if out is not None else None

    def read(self, path) -> str:
        data = Path(path).read_bytes()
        self.report.inputs[str(path)] = _digest(data)
        return data.decode("utf-8")

    def write(self, name: str, text: str):
        data = text.encode("utf-8")
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_bytes(data)
        self.report.outputs[name] = _digest(data)

    def warn(self, message: str):
        self.report.warnings.append(message)
        log.warning(message)


_UNSAFE = re.compile(r"[^A-Za-z0-9._-]")


def _file_stem(sample_id: str) -> str:
    return _UNSAFE.sub("_", sample_id) or "_"


def _load(session, args):
    manifest = parse_manifest(session.read(args.manifest))
    dataset = parse_events_csv(session.read(args.events), manifest)
    for w in validate_dataset(dataset).warnings:
        session.warn(str(w))
    return manifest, dataset


def _settings(args, manifest: DatasetManifest):
    grid_size = args.grid_size or manifest.grid_size
    estimator = getattr(args, "estimator", None) or manifest.estimator
    denominator = getattr(args, "denominator", None) or manifest.denominator
    return grid_size, estimator, denominator


def _smooth_entropy(curve: EntropyCurve, window):
    if not window:
        return curve
    return EntropyCurve(curve.sample_id, curve.estimator, curve.denominator,
                        moving_average(curve.points, window))


def _smooth_rates(series, window):
    if not window:
        return series
    return [RateSeries(s.sample_id, s.label, moving_average(s.points, window),
                       s.is_chance) for s in series]


def _entropy_curves(args, manifest, dataset):
    grid_size, estimator, denominator = _settings(args, manifest)
    curves = []
    for sample_id in dataset.sample_ids:
        grid = expand_dominance(dataset, sample_id, grid_size)
        curve = entropy_curve(grid, estimator, denominator)
        curves.append(_smooth_entropy(curve, args.smooth))
    return curves


# -- subcommands ----------------------------------------------------------

def cmd_validate(args, session):
    try:
        manifest = parse_manifest(session.read(args.manifest))
        dataset = parse_events_csv(session.read(args.events), manifest)
    except IngestError as exc:
        for issue in exc.issues:
            print(issue)
        return EXIT_INVALID
    report = validate_dataset(dataset)
    for line in report.lines():
        print(line)
    print(f"ok: {len(dataset.measurements)} measurements, "
          f"{len(dataset.sample_ids)} samples, {len(report.warnings)} warnings")
    return EXIT_OK


def cmd_simulate(args, session):
    if args.config:
        config = load_config(session.read(args.config))
    else:
        config = default_config()
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    samples = args.sample or ["synthetic"]
    dataset = generate_dataset(config, samples)
    manifest = DatasetManifest(config.attributes, config.n_r,
                               {s: f"simulated, seed {config.seed}"
                                for s in samples})
    session.write("manifest.yaml", write_manifest(manifest))
    session.write("events.csv", write_events_csv(dataset))
    return EXIT_OK


def cmd_entropy(args, session):
    manifest, dataset = _load(session, args)
    for curve in _entropy_curves(args, manifest, dataset):
        session.write(f"{_file_stem(curve.sample_id)}.entropy.csv",
                      write_curve_csv(curve))
    return EXIT_OK


def cmd_complexity(args, session):
    if args.entropy:
        if args.manifest or args.events:
            raise UsageError("use either --entropy or --manifest/--events")
        curves = []
        for path in args.entropy:
            curves.extend(c for c in parse_curve_csv(session.read(path))
                          if isinstance(c, EntropyCurve))
        if not curves:
            raise UsageError("no entropy curve found in the given files")
    else:
        if not (args.manifest and args.events):
            raise UsageError("--manifest and --events are required "
                             "unless --entropy is given")
        manifest, dataset = _load(session, args)
        curves = _entropy_curves(args, manifest, dataset)
    for curve in curves:
        session.write(f"{_file_stem(curve.sample_id)}.complexity.csv",
                      write_curve_csv(complexity_curve(curve)))
    return EXIT_OK


def cmd_tds(args, session):
    manifest, dataset = _load(session, args)
    grid_size = args.grid_size or manifest.grid_size
    for sample_id in dataset.sample_ids:
        curves = tds_curves(expand_dominance(dataset, sample_id, grid_size))
        series = _smooth_rates(curves.all_series(), args.smooth)
        session.write(f"{_file_stem(sample_id)}.tds.csv",
                      write_curve_csv(series))
    return EXIT_OK


def _plot_curves(curves, title=None):
    if all(isinstance(c, ComplexityCurve) for c in curves):
        axis_max = 0.25
    else:
        axis_max = 1.0
    samples = list(dict.fromkeys(c.sample_id for c in curves))
    labels = []
    for c in curves:
        label = c.label if isinstance(c, RateSeries) else c.estimator
        labels.append(label if len(samples) == 1 else f"{c.sample_id}:{label}")
    return curve_svg(curves, axis_max, title or ", ".join(samples), labels)


def cmd_plot(args, session):
    curves = parse_curve_csv(session.read(args.csv))
    if not curves:
        raise UsageError(f"{args.csv} holds no curve")
    out = Path(args.out)
    session.out = out.parent
    session.write(out.name, _plot_curves(curves, args.title))
    return EXIT_OK


def cmd_report(args, session):
    manifest, dataset = _load(session, args)
    grid_size, _, _ = _settings(args, manifest)
    rows = []
    for curve in _entropy_curves(args, manifest, dataset):
        stem = _file_stem(curve.sample_id)
        grid = expand_dominance(dataset, curve.sample_id, grid_size)
        rates = _smooth_rates(tds_curves(grid).all_series(), args.smooth)
        complexity = complexity_curve(curve)
        session.write(f"{stem}.tds.csv", write_curve_csv(rates))
        session.write(f"{stem}.entropy.csv", write_curve_csv(curve))
        session.write(f"{stem}.complexity.csv", write_curve_csv(complexity))
        session.write(f"{stem}.tds.svg", curve_svg(
            rates, 1.0, f"{curve.sample_id}: dominance rate",
            [s.label for s in rates]))
        session.write(f"{stem}.entropy.svg", curve_svg(
            [curve], 1.0, f"{curve.sample_id}: entropy ({curve.estimator})"))
        session.write(f"{stem}.complexity.svg", curve_svg(
            [complexity], 0.25,
            f"{curve.sample_id}: complexity ({curve.estimator})"))
        try:
            f = curve_features(curve)
        except TdsError as exc:
            session.warn(f"sample={curve.sample_id}: {exc}")
            continue
        rows.append([f.sample_id, repr(f.first_defined_tau), repr(f.h_first),
                     repr(f.h_max), repr(f.tau_argmax), repr(f.h_swallow),
                     str(f.rise_then_fall).lower()])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FEATURE_HEADER)
    w.writerows(rows)
    session.write("features.csv", buf.getvalue())
    session.write("run-report.json", session.report.to_json())
    return EXIT_OK


# -- parser ---------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_data(p, required=True):
    p.add_argument("--manifest", required=required, help="manifest (YAML)")
    p.add_argument("--events", required=required, help="event CSV")


def _add_curve_opts(p, estimator=True):
    p.add_argument("--grid-size", type=int, default=None,
                   help="grid points per mastication (default: manifest, 100)")
    p.add_argument("--smooth", type=int, default=None, metavar="W",
                   help="centered moving average with odd window W")
    if estimator:
        p.add_argument("--estimator", choices=ESTIMATORS, default=None)
        p.add_argument("--denominator", choices=DENOMINATORS, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tdsentropy", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("validate", help="check a manifest and event file")
    _add_data(p)

    p = sub.add_parser("simulate", help="write a synthetic panel")
    p.add_argument("--config", help="simulator config (default: shipped)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--sample", action="append",
                   help="sample id; repeat for several (default: synthetic)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("entropy", help="entropy curve CSV per sample")
    _add_data(p)
    _add_curve_opts(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("complexity", help="complexity curve CSV per sample")
    p.add_argument("--entropy", nargs="+", help="entropy curve CSVs")
    _add_data(p, required=False)
    _add_curve_opts(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("tds", help="dominance-rate CSV per sample")
    _add_data(p)
    _add_curve_opts(p, estimator=False)
    p.add_argument("--out", required=True)

    p = sub.add_parser("plot", help="render a curve CSV to SVG")
    p.add_argument("csv")
    p.add_argument("--out", required=True, help="SVG file to write")
    p.add_argument("--title")

    p = sub.add_parser("report", help="curves, features, figures, run report")
    _add_data(p)
    _add_curve_opts(p)
    p.add_argument("--out", required=True)
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "entropy": cmd_entropy,
    "complexity": cmd_complexity,
    "tds": cmd_tds,
    "plot": cmd_plot,
    "report": cmd_report,
}


def run(argv) -> RunReport:
    """Execute one subcommand; the returned report carries the exit code."""
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "smooth", None) is not None and \
                (args.smooth < 1 or args.smooth % 2 == 0):
            raise UsageError("--smooth must be a positive odd integer")
        if getattr(args, "grid_size", None) is not None and args.grid_size < 1:
            raise UsageError("--grid-size must be >= 1")
    except UsageError as exc:
        log.error("usage: %s", exc)
        return RunReport(" ".join(argv), exit_code=EXIT_USAGE)

    session = _Session(args.command, getattr(args, "out", None))
    try:
        code = COMMANDS[args.command](args, session)
    except UsageError as exc:
        log.error("usage: %s", exc)
        code = EXIT_USAGE
    except IngestError as exc:
        for issue in exc.issues:
            log.error("%s", issue)
        code = EXIT_INVALID
    except TdsError as exc:
        log.error("%s", exc)
        code = EXIT_INVALID
    except OSError as exc:
        log.error("I/O error: %s", exc)
        code = EXIT_IO
    except UnicodeDecodeError as exc:
        log.error("input is not UTF-8: %s", exc)
        code = EXIT_INVALID
    session.report.exit_code = code
    session.report.elapsed_s = time.perf_counter() - start
    return session.report


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    logging.basicConfig(
        level=logging.INFO if "-v" in argv or "--verbose" in argv
        else logging.WARNING,
        format="%(levelname)s: %(message)s", stream=sys.stderr)
    report = run(argv)
    for name in report.outputs:
        log.info("wrote %s", name)
    log.info("%s finished in %.3f s (exit %d)", report.command,
             report.elapsed_s, report.exit_code)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
