"""Selection probabilities, normalized entropy and complexity over a dominance grid.

Entropy is normalized by ``log2(N_a)`` so that it is 0 when the whole panel
agrees on one attribute and 1 when every declared attribute is equally likely.
Complexity is ``C = H * (1 - H)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from tdsentropy.core import DominanceGrid
from tdsentropy.errors import DomainError, NoDataError

PLUGIN = "plugin"
CHAO_SHEN = "chao-shen"
ESTIMATORS = (PLUGIN, CHAO_SHEN)

PANEL = "panel"
ACTIVE = "active"
DENOMINATORS = (PANEL, ACTIVE)

NO_DATA = "no-data"
CLAMPED = "clamped"
SINGLETON_FALLBACK = "singleton-fallback"
FLAG_ORDER = (NO_DATA, CLAMPED, SINGLETON_FALLBACK)

PROB_TOL = 1e-12


def canonical_flags(flags) -> tuple:
    flags = set(flags)
    unknown = flags - set(FLAG_ORDER)
    if unknown:
        raise DomainError(f"unknown flags: {sorted(unknown)}")
    return tuple(f for f in FLAG_ORDER if f in flags)


class CurvePoint(NamedTuple):
    tau: float
    value: float
    flags: tuple = ()


@dataclass(frozen=True)
class EntropyCurve:
    sample_id: str
    estimator: str
    denominator: str
    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    @property
    def tau(self):
        return np.array([p.tau for p in self.points])

    @property
    def values(self):
        return np.array([p.value for p in self.points])


@dataclass(frozen=True)
class ComplexityCurve:
    """``C = H(1 - H)`` of an entropy curve; keeps the source estimator tags."""

    sample_id: str
    estimator: str
    denominator: str
    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    @property
    def tau(self):
        return np.array([p.tau for p in self.points])

    @property
    def values(self):
        return np.array([p.value for p in self.points])


def _check_mode(mode):
    if mode not in DENOMINATORS:
        raise DomainError(f"denominator mode must be one of {DENOMINATORS}")


def selection_probabilities(grid: DominanceGrid, tau: float,
                            mode: str = ACTIVE) -> np.ndarray:
    """Probability that each attribute is dominant at `tau`.

    ``panel`` divides by the number of measurements for the sample, so the
    vector sums to less than 1 while panelists are still in their lag time.
    ``active`` divides by the number of measurements holding a selection.
    """
    _check_mode(mode)
    counts = grid.counts[:, grid.index_of(tau)]
    if mode == PANEL:
        return counts / grid.panel_denominator
    total = counts.sum()
    if total == 0:
        raise NoDataError(f"no selection made by tau={tau}")
    return counts / total


def _as_probabilities(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise DomainError("probabilities must be a 1-D vector")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise DomainError("probabilities must be finite and non-negative")
    if math.fsum(p) > 1 + PROB_TOL:
        raise DomainError(f"probabilities sum to {math.fsum(p)} > 1")
    return p


def shannon_bits(p) -> float:
    """Unnormalized Shannon entropy ``-sum p log2 p`` in bits (0 log 0 = 0)."""
    p = _as_probabilities(p)
    nz = p[p > 0]
    return math.fsum(-nz * np.log2(nz))


def plugin_entropy(p, n_attributes: int) -> float:
    """Normalized plug-in entropy of the probability vector `p`.

    Parameters
    ----------
    p : array_like
        Selection probabilities, one per attribute (missing trailing
        attributes count as zero).
    n_attributes : int
        Size of the declared attribute set, ``N_a >= 2``.

    Returns
    -------
    float
        ``-sum(p log2 p) / log2(N_a)`` in [0, 1].
    """
    if n_attributes < 2:
        raise DomainError(f"need at least 2 attributes, got {n_attributes}")
    p = _as_probabilities(p)
    if len(p) > n_attributes:
        raise DomainError(
            f"{len(p)} probabilities for {n_attributes} attributes")
    h = shannon_bits(p) / math.log2(n_attributes)
    # clamp rounding residue only
    if -PROB_TOL < h < 0:
        h = 0.0
    elif 1 < h < 1 + PROB_TOL:
        h = 1.0
    return h


def chao_shen_entropy(counts, n_attributes: int, denominator=None):
    """Coverage-adjusted (Chao-Shen) normalized entropy from selection counts.

    Parameters
    ----------
    counts : array_like of int
        Number of measurements holding each attribute dominant.
    n_attributes : int
        Size of the declared attribute set.
    denominator : int, optional
        Divisor turning counts into probabilities before the coverage
        adjustment.  Defaults to the total count ``N``; pass the panel size
        for panel-mode curves.

    Returns
    -------
    (float, tuple)
        The estimate in [0, 1] and its flags (``singleton-fallback`` when all
        observations were singletons, ``clamped`` when the raw estimate
        exceeded 1).
    """
    if n_attributes < 2:
        raise DomainError(f"need at least 2 attributes, got {n_attributes}")
    counts = np.asarray(counts)
    if counts.ndim != 1 or np.any(counts < 0) or len(counts) > n_attributes:
        raise DomainError("counts must be a vector of non-negative integers, "
                          "one per attribute")
    if not np.all(counts == np.round(counts)):
        raise DomainError("counts must be integers")
    counts = counts.astype(np.int64)
    n = int(counts.sum())
    if n == 0:
        raise NoDataError("no observations")
    denominator = n if denominator is None else denominator
    if denominator < n:
        raise DomainError(f"denominator {denominator} below total count {n}")

    flags = []
    singletons = int(np.sum(counts == 1))
    if singletons == n:
        singletons = n - 1
        flags.append(SINGLETON_FALLBACK)
    coverage = 1.0 - singletons / n
    observed = counts[counts > 0]
    p_hat = coverage * observed / denominator
    # inclusion probability of each observed attribute in a sample of size n
    inclusion = 1.0 - (1.0 - p_hat) ** n
    terms = -p_hat * np.log2(p_hat) / inclusion
    h = math.fsum(terms) / math.log2(n_attributes)
    if -PROB_TOL < h < 0:
        h = 0.0
    if h > 1:
        h = 1.0
        flags.append(CLAMPED)
    return h, canonical_flags(flags)


def entropy_curve(grid: DominanceGrid, estimator: str = CHAO_SHEN,
                  mode: str = ACTIVE) -> EntropyCurve:
    """Entropy at every grid point; lag points with no selection are flagged."""
    if estimator not in ESTIMATORS:
        raise DomainError(f"estimator must be one of {ESTIMATORS}")
    _check_mode(mode)
    n_a = grid.n_attributes
    points = []
    for k, tau in enumerate(grid.tau):
        counts = grid.counts[:, k]
        n = int(counts.sum())
        if n == 0:
            points.append(CurvePoint(float(tau), 0.0, (NO_DATA,)))
            continue
        denominator = grid.panel_denominator if mode == PANEL else n
        if estimator == PLUGIN:
            h, flags = plugin_entropy(counts / denominator, n_a), ()
        else:
            h, flags = chao_shen_entropy(counts, n_a, denominator)
        points.append(CurvePoint(float(tau), h, flags))
    return EntropyCurve(grid.sample_id, estimator, mode, points)


def complexity_value(h: float) -> float:
    if not 0 <= h <= 1:
        raise DomainError(f"entropy must lie in [0, 1], got {h}")
    return h * (1.0 - h)


def complexity_curve(entropy: EntropyCurve) -> ComplexityCurve:
    points = [CurvePoint(p.tau, complexity_value(p.value), p.flags)
              for p in entropy.points]
    return ComplexityCurve(entropy.sample_id, entropy.estimator,
                           entropy.denominator, points)

