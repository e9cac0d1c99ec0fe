"""TDS domain model: attributes, measurements, datasets and dominance grids.

A measurement is a panelist's ordered list of selections during one
mastication.  Time is normalized per measurement so that intake is 0 and
swallowing is 100.  A selected attribute stays dominant until the next
selection, and the last one stays dominant through swallowing.
"""

from __future__ import annotations

import bisect
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from tdsentropy.errors import DomainError, NotFoundError

#: Above this many attributes panelists stop using the full list.
MAX_USABLE_ATTRIBUTES = 10

DEFAULT_GRID_SIZE = 100


@dataclass(frozen=True)
class AttributeSet:
    """Ordered, declared list of texture attributes.

    The declared list fixes the normalization of entropy, so attributes that
    nobody selects still count.
    """

    names: tuple

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(names) < 2:
            raise DomainError(
                f"at least 2 attributes are required, got {len(names)}")
        if not all(isinstance(n, str) and n for n in names):
            raise DomainError("attribute names must be non-empty strings")
        dupes = sorted(n for n, c in Counter(names).items() if c > 1)
        if dupes:
            raise DomainError(f"duplicate attribute names: {', '.join(dupes)}")

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __getitem__(self, idx):
        return self.names[idx]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise NotFoundError(
                f"unknown attribute {name!r}; valid labels: "
                f"{', '.join(self.names)}") from None


@dataclass(frozen=True)
class SelectionEvent:
    attribute_idx: int
    onset_s: float


@dataclass(frozen=True)
class Measurement:
    """One panelist x repetition x sample mastication."""

    panelist_id: str
    repetition_idx: int
    sample_id: str
    swallow_s: float
    events: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    @property
    def key(self):
        return (self.panelist_id, self.repetition_idx, self.sample_id)

    def label(self) -> str:
        return (f"panelist={self.panelist_id} rep={self.repetition_idx} "
                f"sample={self.sample_id}")


def measurement_sort_key(m: Measurement):
    return (m.sample_id, m.panelist_id, m.repetition_idx)


@dataclass(frozen=True)
class TdsDataset:
    attributes: AttributeSet
    measurements: tuple
    n_r: int = 1

    def __post_init__(self):
        object.__setattr__(self, "measurements", tuple(self.measurements))

    @property
    def n_p(self) -> int:
        return len({m.panelist_id for m in self.measurements})

    @property
    def sample_ids(self) -> list:
        """Sample ids in order of first appearance."""
        return list(dict.fromkeys(m.sample_id for m in self.measurements))

    def for_sample(self, sample_id: str) -> list:
        return [m for m in self.measurements if m.sample_id == sample_id]


@dataclass(frozen=True)
class DominanceGrid:
    """Per-attribute dominance counts on the normalized time grid.

    ``counts[a, k]`` is the number of measurements in which attribute ``a``
    is dominant at ``tau[k] = 100 * k / grid_size``.
    """

    sample_id: str
    attributes: AttributeSet
    grid_size: int
    counts: np.ndarray
    panel_denominator: int

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def tau(self) -> np.ndarray:
        return np.arange(self.grid_size + 1) * 100.0 / self.grid_size

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    def index_of(self, tau: float) -> int:
        k = int(round(tau * self.grid_size / 100.0))
        if not 0 <= k <= self.grid_size or abs(self.tau[k] - tau) > 1e-9:
            raise DomainError(f"tau={tau} is not a point of this grid")
        return k


def normalize_onset(onset_s: float, swallow_s: float) -> float:
    """Map an onset in seconds to percent of mastication time."""
    if not swallow_s > 0:
        raise DomainError(f"swallow time must be positive, got {swallow_s}")
    if not 0 <= onset_s <= swallow_s:
        raise DomainError(
            f"onset {onset_s} s lies outside [0, {swallow_s}] s")
    return 100.0 * onset_s / swallow_s


def dominant_at(m: Measurement, tau: float) -> Optional[int]:
    """Attribute index dominant at normalized time `tau`, or None during the lag.

    Comparisons are done in exact rational arithmetic so that the result
    agrees with :func:`expand_dominance` on every grid point.
    """
    if not 0 <= tau <= 100:
        raise DomainError(f"tau must lie in [0, 100], got {tau}")
    # onset / T <= tau / 100  <=>  100 * onset <= tau * T
    bound = Fraction(tau) * Fraction(m.swallow_s)
    scaled = [100 * Fraction(e.onset_s) for e in m.events]
    pos = bisect.bisect_right(scaled, bound)
    if pos == 0:
        return None
    return m.events[pos - 1].attribute_idx


def _first_grid_index(onset_s: float, swallow_s: float, grid_size: int) -> int:
    # smallest k with onset / T <= k / G
    num = Fraction(onset_s) * grid_size
    return int(-((-num) // Fraction(swallow_s)))


def expand_dominance(dataset: TdsDataset, sample_id: str,
                     grid_size: int = DEFAULT_GRID_SIZE) -> DominanceGrid:
    """Count, per grid point, how many measurements hold each attribute dominant."""
    if grid_size < 1:
        raise DomainError(f"grid size must be >= 1, got {grid_size}")
    measurements = dataset.for_sample(sample_id)
    if not measurements:
        raise NotFoundError(f"sample {sample_id!r} not in dataset")
    n_a = len(dataset.attributes)
    counts = np.zeros((n_a, grid_size + 1), dtype=np.int64)
    for m in measurements:
        starts = [_first_grid_index(e.onset_s, m.swallow_s, grid_size)
                  for e in m.events]
        ends = starts[1:] + [grid_size + 1]
        for e, lo, hi in zip(m.events, starts, ends):
            if hi > lo:
                counts[e.attribute_idx, lo:hi] += 1
    return DominanceGrid(sample_id=sample_id, attributes=dataset.attributes,
                         grid_size=grid_size, counts=counts,
                         panel_denominator=len(measurements))


@dataclass(frozen=True)
class Issue:
    level: str  # "error" | "warning"
    message: str
    location: str = ""
    line: Optional[int] = None

    def __str__(self):
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.location:
            where.append(self.location)
        prefix = f"{self.level}: "
        if where:
            prefix += f"[{'; '.join(where)}] "
        return prefix + self.message


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def add(self, issue: Issue):
        (self.errors if issue.level == "error" else self.warnings).append(issue)

    def extend(self, other: "ValidationReport"):
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)

    def lines(self) -> list:
        return [str(i) for i in self.errors + self.warnings]


def validate_dataset(dataset: TdsDataset) -> ValidationReport:
    """Check dataset invariants; never raises, findings go into the report."""
    report = ValidationReport()
    n_a = len(dataset.attributes)
    if n_a > MAX_USABLE_ATTRIBUTES:
        report.add(Issue(
            "warning",
            f"{n_a} attributes declared; panelists typically use at most "
            f"{MAX_USABLE_ATTRIBUTES}"))

    seen = Counter(m.key for m in dataset.measurements)
    for key, n in sorted(seen.items()):
        if n > 1:
            report.add(Issue(
                "error", f"measurement appears {n} times",
                f"panelist={key[0]} rep={key[1]} sample={key[2]}"))

    for m in dataset.measurements:
        loc = m.label()
        if m.repetition_idx < 1:
            report.add(Issue("error", "repetition index must be >= 1", loc))
        if not m.swallow_s > 0:
            report.add(Issue(
                "error", f"swallow time must be positive, got {m.swallow_s}",
                loc))
            continue
        if not m.events:
            report.add(Issue("warning", "measurement has no selections", loc))
        prev = None
        for i, e in enumerate(m.events):
            if not 0 <= e.attribute_idx < n_a:
                report.add(Issue(
                    "error",
                    f"event {i}: attribute index {e.attribute_idx} outside "
                    f"[0, {n_a})", loc))
            if not 0 <= e.onset_s <= m.swallow_s:
                report.add(Issue(
                    "error",
                    f"event {i}: onset {e.onset_s} s outside "
                    f"[0, {m.swallow_s}] s", loc))
            if prev is not None and not e.onset_s > prev:
                report.add(Issue(
                    "error",
                    f"event {i}: onset {e.onset_s} s does not follow "
                    f"previous onset {prev} s", loc))
            prev = e.onset_s

    per_sample = defaultdict(int)
    for m in dataset.measurements:
        per_sample[m.sample_id] += 1
    expected = dataset.n_p * dataset.n_r
    for sample_id, n in per_sample.items():
        if n != expected:
            report.add(Issue(
                "warning",
                f"incomplete design: {n} measurements, expected n_p x n_r = "
                f"{dataset.n_p} x {dataset.n_r} = {expected}; using {n} as "
                f"panel denominator", f"sample={sample_id}"))
    return report


def sorted_measurements(measurements: Sequence[Measurement]) -> tuple:
    return tuple(sorted(measurements, key=measurement_sort_key))
