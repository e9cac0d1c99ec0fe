"""Reading and writing manifests, event tables and curve tables.

Event CSV
    ``panelist,rep,sample,attribute,onset_s,swallow_s``, one row per
    selection.  A row with empty ``attribute`` and ``onset_s`` declares a
    measurement in which the panelist never selected anything.

Curve CSV
    ``sample,estimator,denominator,tau,value,flags``.  The estimator column
    is ``plugin`` or ``chao-shen`` for entropy, ``complexity:<estimator>``
    for complexity, ``rate:<attribute>`` for dominance rates and ``chance``
    for the chance level.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field

import yaml

from tdsentropy.core import (
    DEFAULT_GRID_SIZE,
    AttributeSet,
    Issue,
    Measurement,
    SelectionEvent,
    TdsDataset,
    sorted_measurements,
    validate_dataset,
)
from tdsentropy.errors import DomainError, IngestError, TdsError
from tdsentropy.estimators import (
    ACTIVE,
    CHAO_SHEN,
    DENOMINATORS,
    ESTIMATORS,
    PANEL,
    ComplexityCurve,
    CurvePoint,
    EntropyCurve,
    canonical_flags,
)

EVENT_HEADER = ["panelist", "rep", "sample", "attribute", "onset_s",
                "swallow_s"]
CURVE_HEADER = ["sample", "estimator", "denominator", "tau", "value", "flags"]

COMPLEXITY_PREFIX = "complexity:"
RATE_PREFIX = "rate:"
CHANCE = "chance"


@dataclass(frozen=True)
class DatasetManifest:
    attributes: AttributeSet
    n_r: int
    samples: dict = field(default_factory=dict)
    grid_size: int = DEFAULT_GRID_SIZE
    estimator: str = CHAO_SHEN
    denominator: str = ACTIVE


def _manifest_error(message):
    return IngestError([Issue("error", message, "manifest")])


def parse_manifest(text: str) -> DatasetManifest:
    """Parse a YAML manifest declaring the attribute list and panel design."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise _manifest_error(f"malformed manifest: {exc}") from None
    if not isinstance(doc, dict):
        raise _manifest_error("manifest must be a mapping")
    for key in ("attributes", "n_r"):
        if key not in doc:
            raise _manifest_error(f"missing required key {key!r}")
    names = doc["attributes"]
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise _manifest_error("'attributes' must be a list of strings")
    try:
        attributes = AttributeSet(names)
    except DomainError as exc:
        raise _manifest_error(str(exc)) from None
    n_r = doc["n_r"]
    if not isinstance(n_r, int) or isinstance(n_r, bool) or n_r < 1:
        raise _manifest_error(f"'n_r' must be an integer >= 1, got {n_r!r}")
    samples = doc.get("samples") or {}
    if not isinstance(samples, dict):
        raise _manifest_error("'samples' must be a mapping")
    samples = {str(k): "" if v is None else str(v) for k, v in samples.items()}

    options = doc.get("options") or {}
    if not isinstance(options, dict):
        raise _manifest_error("'options' must be a mapping")
    unknown = set(options) - {"grid_size", "estimator", "denominator"}
    if unknown:
        raise _manifest_error(f"unknown options: {sorted(unknown)}")
    grid_size = options.get("grid_size", DEFAULT_GRID_SIZE)
    if not isinstance(grid_size, int) or isinstance(grid_size, bool) \
            or grid_size < 1:
        raise _manifest_error("'options.grid_size' must be an integer >= 1")
    estimator = options.get("estimator", CHAO_SHEN)
    if estimator not in ESTIMATORS:
        raise _manifest_error(
            f"'options.estimator' must be one of {', '.join(ESTIMATORS)}")
    denominator = options.get("denominator", ACTIVE)
    if denominator not in DENOMINATORS:
        raise _manifest_error(
            f"'options.denominator' must be one of {', '.join(DENOMINATORS)}")
    return DatasetManifest(attributes, n_r, samples, grid_size, estimator,
                           denominator)


def write_manifest(manifest: DatasetManifest) -> str:
    doc = {"attributes": list(manifest.attributes.names), "n_r": manifest.n_r}
    if manifest.samples:
        doc["samples"] = dict(manifest.samples)
    doc["options"] = {"grid_size": manifest.grid_size,
                      "estimator": manifest.estimator,
                      "denominator": manifest.denominator}
    return yaml.safe_dump(doc, sort_keys=False)


def _read_rows(text: str, header: list, what: str):
    """Yield (line number, row) after checking the header."""
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        first = next(reader)
    except StopIteration:
        raise IngestError([Issue("error", f"empty {what} file", line=1)]) \
            from None
    if first and first[0].startswith("\ufeff"):
        first[0] = first[0][1:]
    if first != header:
        raise IngestError([Issue(
            "error", f"header must be exactly {','.join(header)}, got "
            f"{','.join(first)}", line=1)])
    for row in reader:
        if not row:
            continue
        yield reader.line_num, row


def _number(value, name, issues, line):
    try:
        x = float(value)
    except ValueError:
        issues.append(Issue("error", f"{name} is not a number: {value!r}",
                            line=line))
        return None
    if not math.isfinite(x):
        issues.append(Issue("error", f"{name} is not finite: {value!r}",
                            line=line))
        return None
    return x


def parse_events_csv(text: str, manifest: DatasetManifest) -> TdsDataset:
    """Parse an event table into a validated dataset.

    Rows are grouped into measurements and events sorted by onset, so row
    order does not matter.  Raises :class:`IngestError` listing every error
    found, each with its line number.  Warnings are left to
    :func:`~tdsentropy.core.validate_dataset`.
    """
    issues = []
    groups = defaultdict(list)  # key -> [(line, attr_idx | None, onset, swallow)]
    for line, row in _read_rows(text, EVENT_HEADER, "event"):
        if len(row) != len(EVENT_HEADER):
            issues.append(Issue(
                "error", f"expected {len(EVENT_HEADER)} fields, got {len(row)}",
                line=line))
            continue
        panelist, rep, sample, attribute, onset, swallow = row
        if not panelist or not sample:
            issues.append(Issue("error", "panelist and sample must be set",
                                line=line))
            continue
        try:
            rep_idx = int(rep)
        except ValueError:
            issues.append(Issue("error", f"rep is not an integer: {rep!r}",
                                line=line))
            continue
        swallow_s = _number(swallow, "swallow_s", issues, line)
        if attribute == "" and onset == "":
            attr_idx = onset_s = None
        else:
            onset_s = _number(onset, "onset_s", issues, line)
            try:
                attr_idx = manifest.attributes.index(attribute)
            except TdsError as exc:
                issues.append(Issue("error", str(exc), line=line))
                continue
        if swallow_s is None or (attr_idx is not None and onset_s is None):
            continue
        groups[(panelist, rep_idx, sample)].append(
            (line, attr_idx, onset_s, swallow_s))

    measurements = []
    for key, rows in groups.items():
        where = f"panelist={key[0]} rep={key[1]} sample={key[2]}"
        swallows = {r[3] for r in rows}
        if len(swallows) > 1:
            lines = ", ".join(str(r[0]) for r in rows)
            issues.append(Issue(
                "error", f"inconsistent swallow_s {sorted(swallows)} on "
                f"lines {lines}", where, line=rows[-1][0]))
            continue
        swallow_s = rows[0][3]
        events = sorted((r for r in rows if r[1] is not None),
                        key=lambda r: (r[2], r[0]))
        bad = False
        for r in events:
            if not 0 <= r[2] <= swallow_s:
                issues.append(Issue(
                    "error", f"onset_s {r[2]} outside [0, swallow_s={swallow_s}]",
                    where, line=r[0]))
                bad = True
        for a, b in zip(events, events[1:]):
            if a[2] == b[2]:
                issues.append(Issue(
                    "error", f"duplicate onset_s {b[2]} (also on line {a[0]})",
                    where, line=b[0]))
                bad = True
        if not swallow_s > 0:
            issues.append(Issue("error", "swallow_s must be positive", where,
                                line=rows[0][0]))
            bad = True
        if key[1] < 1:
            issues.append(Issue("error", "rep must be >= 1", where,
                                line=rows[0][0]))
            bad = True
        if bad:
            continue
        measurements.append(Measurement(
            key[0], key[1], key[2], swallow_s,
            [SelectionEvent(r[1], r[2]) for r in events]))
    if issues:
        raise IngestError(sorted(issues, key=lambda i: i.line or 0))

    dataset = TdsDataset(manifest.attributes, sorted_measurements(measurements),
                         manifest.n_r)
    report = validate_dataset(dataset)
    if not report.ok:
        raise IngestError(report.errors)
    return dataset


def _fmt(x: float) -> str:
    s = format(float(x), ".17g")
    if not any(c in s for c in ".eninf"):
        s += ".0"
    return s


def _fmt_tau(tau: float) -> str:
    tau = float(tau)
    return str(int(tau)) if tau.is_integer() else format(tau, ".17g")


def write_events_csv(dataset: TdsDataset) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(EVENT_HEADER)
    for m in sorted_measurements(dataset.measurements):
        base = [m.panelist_id, m.repetition_idx, m.sample_id]
        if not m.events:
            w.writerow(base + ["", "", _fmt(m.swallow_s)])
        for e in m.events:
            w.writerow(base + [dataset.attributes[e.attribute_idx],
                               _fmt(e.onset_s), _fmt(m.swallow_s)])
    return out.getvalue()


@dataclass(frozen=True)
class RateSeries:
    """Panel-mode dominance rate of one attribute, or the chance level."""

    sample_id: str
    label: str
    points: tuple
    is_chance: bool = False

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    @property
    def values(self):
        return [p.value for p in self.points]


def _curve_rows(curve):
    if isinstance(curve, EntropyCurve):
        return curve.sample_id, curve.estimator, curve.denominator
    if isinstance(curve, ComplexityCurve):
        return (curve.sample_id, COMPLEXITY_PREFIX + curve.estimator,
                curve.denominator)
    if isinstance(curve, RateSeries):
        tag = CHANCE if curve.is_chance else RATE_PREFIX + curve.label
        return curve.sample_id, tag, PANEL
    raise TypeError(f"cannot serialize {type(curve).__name__}")


def write_curve_csv(curves) -> str:
    """Serialize one curve, or several under a single header."""
    if not isinstance(curves, (list, tuple)):
        curves = [curves]
    if not curves:
        raise DomainError("nothing to write")
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for curve in curves:
        if not curve.points:
            raise DomainError(f"empty curve for sample {curve.sample_id!r}")
        sample, estimator, denominator = _curve_rows(curve)
        for p in curve.points:
            w.writerow([sample, estimator, denominator, _fmt_tau(p.tau),
                        _fmt(p.value), ";".join(p.flags)])
    return out.getvalue()


def parse_curve_csv(text: str) -> list:
    """Parse a curve table back into curve objects, in order of appearance."""
    issues = []
    grouped = {}
    for line, row in _read_rows(text, CURVE_HEADER, "curve"):
        if len(row) != len(CURVE_HEADER):
            issues.append(Issue(
                "error", f"expected {len(CURVE_HEADER)} fields, got {len(row)}",
                line=line))
            continue
        sample, estimator, denominator, tau, value, flags = row
        tau_v = _number(tau, "tau", issues, line)
        value_v = _number(value, "value", issues, line)
        try:
            flag_t = canonical_flags(flags.split(";") if flags else ())
        except DomainError as exc:
            issues.append(Issue("error", str(exc), line=line))
            continue
        if tau_v is None or value_v is None:
            continue
        base = estimator[len(COMPLEXITY_PREFIX):] \
            if estimator.startswith(COMPLEXITY_PREFIX) else estimator
        if not (estimator == CHANCE or estimator.startswith(RATE_PREFIX)
                or base in ESTIMATORS):
            issues.append(Issue("error", f"unknown estimator {estimator!r}",
                                line=line))
            continue
        if denominator not in DENOMINATORS:
            issues.append(Issue(
                "error", f"unknown denominator {denominator!r}", line=line))
            continue
        grouped.setdefault((sample, estimator, denominator), []).append(
            CurvePoint(tau_v, value_v, flag_t))
    if issues:
        raise IngestError(issues)

    curves = []
    for (sample, estimator, denominator), points in grouped.items():
        if estimator == CHANCE:
            curves.append(RateSeries(sample, CHANCE, points, is_chance=True))
        elif estimator.startswith(RATE_PREFIX):
            curves.append(RateSeries(sample, estimator[len(RATE_PREFIX):],
                                     points))
        elif estimator.startswith(COMPLEXITY_PREFIX):
            curves.append(ComplexityCurve(
                sample, estimator[len(COMPLEXITY_PREFIX):], denominator, points))
        else:
            curves.append(EntropyCurve(sample, estimator, denominator, points))
    return curves

