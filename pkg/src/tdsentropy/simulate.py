"""Seeded synthetic TDS panels.

Each simulated mastication draws a swallow time ``T`` and a lag ``L`` from
truncated normals, makes its first selection at ``L`` and then re-selects
after exponential gaps until ``T``.  Every selection draws its attribute from
the weights of the phase active at ``onset / T``.  Re-selecting the current
attribute changes nothing and is dropped.

Randomness for one measurement comes only from ``(seed, panelist, rep,
sample)``: the ids are hashed with BLAKE2b into a :class:`numpy.random.SeedSequence`
together with the seed and a stream tag, and drawn with PCG64.  Measurements
are therefore independent of generation order.  Per measurement the draw
order is: swallow time, lag, then batches of exponential gaps, each batch
followed by one attribute uniform per selection it places before ``T`` (the
first batch also covers the selection at the lag).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Sequence

import numpy as np
import yaml

from tdsentropy.core import (
    AttributeSet,
    Measurement,
    SelectionEvent,
    TdsDataset,
)
from tdsentropy.errors import DomainError, NoDataError

MAX_RESAMPLE = 100
LAG_CLAMP = 0.9

_PANEL_STREAM = 0
_ORACLE_STREAM = 1
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class Phase:
    start: float
    end: float
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights",
                           tuple(float(w) for w in self.weights))

    @property
    def probabilities(self) -> np.ndarray:
        w = np.asarray(self.weights)
        return w / w.sum()


@dataclass(frozen=True)
class SimulatorConfig:
    attributes: AttributeSet
    phases: tuple
    n_p: int = 10
    n_r: int = 3
    duration_mean_s: float = 40.8
    duration_sd_s: float = 9.7
    lag_mean_s: float = 3.4
    lag_sd_s: float = 2.3
    dwell_mean_s: float = 4.0
    seed: int = 0
    _cdfs: np.ndarray = field(init=False, repr=False, compare=False)
    _starts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.attributes, AttributeSet):
            object.__setattr__(self, "attributes",
                               AttributeSet(self.attributes))
        object.__setattr__(self, "phases", tuple(self.phases))
        self.validate()
        cdfs = np.array([np.cumsum(ph.probabilities) for ph in self.phases])
        for row, ph in zip(cdfs, self.phases):
            # rounding must never reach a zero-weight trailing attribute
            last = max(i for i, w in enumerate(ph.weights) if w > 0)
            row[last:] = 1.0
        cdfs.setflags(write=False)
        object.__setattr__(self, "_cdfs", cdfs)
        object.__setattr__(self, "_starts",
                           np.array([ph.start for ph in self.phases]))

    def validate(self):
        if self.n_p < 1 or self.n_r < 1:
            raise DomainError("n_p and n_r must be >= 1")
        if not self.duration_mean_s > 0:
            raise DomainError("duration_mean_s must be positive")
        if self.duration_sd_s < 0 or self.lag_sd_s < 0:
            raise DomainError("standard deviations must be >= 0")
        if self.lag_mean_s < 0:
            raise DomainError("lag_mean_s must be >= 0")
        if not self.dwell_mean_s > 0:
            raise DomainError("dwell_mean_s must be positive")
        if not self.phases:
            raise DomainError("at least one phase is required")
        if self.phases[0].start != 0 or self.phases[-1].end != 1:
            raise DomainError("phases must cover [0, 1]")
        for a, b in zip(self.phases, self.phases[1:]):
            if a.end != b.start:
                raise DomainError(
                    f"phases not contiguous at {a.end} / {b.start}")
        n_a = len(self.attributes)
        for ph in self.phases:
            if not ph.start < ph.end:
                raise DomainError(f"empty phase [{ph.start}, {ph.end})")
            if len(ph.weights) != n_a:
                raise DomainError(
                    f"phase [{ph.start}, {ph.end}) has {len(ph.weights)} "
                    f"weights for {n_a} attributes")
            if any(w < 0 or not math.isfinite(w) for w in ph.weights) \
                    or sum(ph.weights) <= 0:
                raise DomainError(
                    "phase weights must be non-negative and not all zero")

    def phase_index(self, frac):
        """Phase active at mastication fraction `frac` in [0, 1]; the last is closed."""
        return np.searchsorted(self._starts, frac, side="right") - 1


def stream_rng(seed: int, *ids, stream: int = _PANEL_STREAM):
    """Independent generator for a stream tag and an id tuple."""
    key = "\x1f".join(str(i) for i in ids).encode("utf-8")
    digest = hashlib.blake2b(key, digest_size=16).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    ss = np.random.SeedSequence([int(seed) & _SEED_MASK, stream, *words])
    return np.random.Generator(np.random.PCG64(ss))


def _truncated_normal(rng, mean, sd, lower, strict):
    for _ in range(MAX_RESAMPLE):
        x = rng.normal(mean, sd)
        if x > lower or (not strict and x == lower):
            return float(x)
    return float(mean)


def _draw_attributes(rng, config, fracs):
    u = rng.random(len(fracs))
    cdf = config._cdfs[config.phase_index(fracs)]
    idx = (u[:, None] >= cdf).sum(axis=1)
    return np.minimum(idx, cdf.shape[1] - 1)


def _draw(rng, config: SimulatorConfig, until: float = 1.0):
    """Return swallow time, onsets and attribute indices of one mastication.

    Selections are generated up to fraction `until` of the swallow time (at
    least one batch past it); later ones cannot change earlier dominance.
    """
    swallow = _truncated_normal(rng, config.duration_mean_s,
                                config.duration_sd_s, 0.0, strict=True)
    lag = _truncated_normal(rng, config.lag_mean_s, config.lag_sd_s, 0.0,
                            strict=False)
    lag = min(lag, LAG_CLAMP * swallow)
    times, attrs = [], []
    t = lag
    batch = max(8, int(math.ceil((swallow - lag) / config.dwell_mean_s)) + 4)
    while True:
        gaps = t + np.cumsum(rng.exponential(config.dwell_mean_s, batch))
        inside = gaps[gaps <= swallow]
        if not times:
            inside = np.concatenate(([lag], inside))
        times.append(inside)
        attrs.append(_draw_attributes(rng, config, inside / swallow))
        if gaps[-1] <= until * swallow:
            t = float(gaps[-1])
            continue
        break
    onsets = np.concatenate(times)
    attrs = np.concatenate(attrs)
    keep = np.ones(len(onsets), dtype=bool)
    keep[1:] = onsets[1:] > onsets[:-1]
    onsets, attrs = onsets[keep], attrs[keep]
    # re-selecting the dominant attribute is a no-op
    keep = np.ones(len(onsets), dtype=bool)
    keep[1:] = attrs[1:] != attrs[:-1]
    return swallow, onsets[keep], attrs[keep]


def sample_measurement(config: SimulatorConfig, panelist_id: str,
                       repetition_idx: int, sample_id: str) -> Measurement:
    rng = stream_rng(config.seed, panelist_id, repetition_idx, sample_id)
    swallow, onsets, attrs = _draw(rng, config)
    events = [SelectionEvent(int(a), float(t)) for t, a in zip(onsets, attrs)]
    return Measurement(panelist_id, repetition_idx, sample_id, swallow, events)


def panelist_ids(n_p: int) -> list:
    width = len(str(n_p))
    return [f"p{i:0{width}d}" for i in range(1, n_p + 1)]


def generate_panel(config: SimulatorConfig, sample_id: str) -> TdsDataset:
    measurements = [
        sample_measurement(config, pid, rep, sample_id)
        for pid in panelist_ids(config.n_p)
        for rep in range(1, config.n_r + 1)
    ]
    return TdsDataset(config.attributes, measurements, config.n_r)


def generate_dataset(config: SimulatorConfig,
                     sample_ids: Sequence[str]) -> TdsDataset:
    measurements = []
    for sample_id in sample_ids:
        measurements.extend(generate_panel(config, sample_id).measurements)
    return TdsDataset(config.attributes, measurements, config.n_r)


def empirical_truth(config: SimulatorConfig, tau: float,
                    n_mc: int) -> np.ndarray:
    """Monte Carlo distribution of the dominant attribute at `tau`.

    Uses a stream disjoint from :func:`generate_panel` and normalizes over the
    simulated mastications that already hold a selection at `tau`.
    """
    if n_mc < 1:
        raise DomainError("n_mc must be >= 1")
    if not 0 <= tau <= 100:
        raise DomainError(f"tau must lie in [0, 100], got {tau}")
    rng = stream_rng(config.seed, "empirical-truth", float(tau),
                     stream=_ORACLE_STREAM)
    counts = np.zeros(len(config.attributes), dtype=np.int64)
    for _ in range(n_mc):
        swallow, onsets, attrs = _draw(rng, config, until=tau / 100.0)
        # same half-open rule as dominant_at: onset / T <= tau / 100
        pos = np.searchsorted(onsets * 100.0, tau * swallow, side="right")
        if pos:
            counts[attrs[pos - 1]] += 1
    if counts.sum() == 0:
        raise NoDataError(f"no simulated selection by tau={tau}")
    return counts / counts.sum()


# -- config files ---------------------------------------------------------

def load_config(text: str) -> SimulatorConfig:
    """Parse a simulator config document (YAML)."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise DomainError(f"malformed simulator config: {exc}") from None
    if not isinstance(doc, dict):
        raise DomainError("simulator config must be a mapping")
    try:
        attributes = AttributeSet(doc["attributes"])
        phases = [Phase(float(p["start"]), float(p["end"]), p["weights"])
                  for p in doc["phases"]]
    except KeyError as exc:
        raise DomainError(f"simulator config missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise DomainError(f"bad simulator config: {exc}") from None
    known = {"n_p", "n_r", "duration_mean_s", "duration_sd_s", "lag_mean_s",
             "lag_sd_s", "dwell_mean_s", "seed"}
    unknown = set(doc) - known - {"attributes", "phases"}
    if unknown:
        raise DomainError(f"unknown simulator config keys: {sorted(unknown)}")
    kwargs = {k: doc[k] for k in known if k in doc}
    for k in ("n_p", "n_r", "seed"):
        if k in kwargs and not isinstance(kwargs[k], int):
            raise DomainError(f"{k} must be an integer")
    return SimulatorConfig(attributes=attributes, phases=phases, **kwargs)


def dump_config(config: SimulatorConfig) -> str:
    doc = {
        "attributes": list(config.attributes.names),
        "n_p": config.n_p,
        "n_r": config.n_r,
        "duration_mean_s": config.duration_mean_s,
        "duration_sd_s": config.duration_sd_s,
        "lag_mean_s": config.lag_mean_s,
        "lag_sd_s": config.lag_sd_s,
        "dwell_mean_s": config.dwell_mean_s,
        "seed": config.seed,
        "phases": [{"start": p.start, "end": p.end, "weights": list(p.weights)}
                   for p in config.phases],
    }
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


def default_config(seed: int | None = None) -> SimulatorConfig:
    """The shipped master-curve configuration."""
    text = resources.files("tdsentropy").joinpath(
        "data/master-curve.default").read_text(encoding="utf-8")
    config = load_config(text)
    return config if seed is None else replace(config, seed=seed)
