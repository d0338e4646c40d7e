"""Aggregation of pair samples: histograms, per-object series, summaries.

The histogram is the frequency-of-occurrence view: log-spaced bins over
the hazard measure, counting only hazard-bearing samples (closing speed
strictly positive). Histograms over the same bin config form a merge
monoid, so partial aggregates built concurrently or from split streams
combine into exactly the batch result.

Scenario maxima (here and in ``hazard.evaluate_frame``) range over samples
that are not moving apart — closing speed >= 0 or contact — so a
drive-past registers its closest approach at full value while an
all-diverging scenario reports zero.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import ConfigError
from .hazard import HazardClass, PairSample, counts_toward_max


@dataclass(frozen=True)
class HistogramConfig:
    """Log-spaced binning: ``bins_per_decade`` bins per factor of ten.

    The span [lo, hi) must cover a whole number of bins. ``measure``
    selects which hazard value is counted ("m3" by default; "m2" for the
    unaugmented measure).
    """

    lo: float = 0.01
    hi: float = 10_000.0
    bins_per_decade: int = 5
    measure: str = "m3"

    def __post_init__(self):
        if not (self.lo > 0.0 and math.isfinite(self.lo)):
            raise ConfigError(f"histogram lo must be positive and finite, got {self.lo}")
        if not (self.hi > self.lo and math.isfinite(self.hi)):
            raise ConfigError(f"histogram hi must exceed lo, got {self.hi}")
        if self.bins_per_decade < 1:
            raise ConfigError(
                f"bins_per_decade must be >= 1, got {self.bins_per_decade}"
            )
        if self.measure not in ("m2", "m3"):
            raise ConfigError(f"histogram measure must be m2 or m3, got {self.measure!r}")
        n = self.bins_per_decade * math.log10(self.hi / self.lo)
        if abs(n - round(n)) > 1e-9 or round(n) < 1:
            raise ConfigError(
                f"[{self.lo}, {self.hi}) does not span a whole number of bins "
                f"at {self.bins_per_decade} bins/decade"
            )

    @property
    def n_bins(self) -> int:
        return round(self.bins_per_decade * math.log10(self.hi / self.lo))

    def edges(self) -> list[float]:
        """Strictly increasing bin edges, n_bins + 1 of them."""
        base = math.log10(self.lo)
        return [10.0 ** (base + i / self.bins_per_decade) for i in range(self.n_bins + 1)]


DEFAULT_HISTOGRAM_CONFIG = HistogramConfig()


@dataclass
class HazardHistogram:
    """Counts per log bin, plus underflow/overflow and the sample total.

    Bins are left-closed right-open: a value exactly on an edge lands in
    the bin that starts there. ``total_samples`` counts every value
    offered to the binning, so sum(counts) + underflow + overflow always
    equals it.
    """

    config: HistogramConfig = field(default_factory=HistogramConfig)
    counts: list[int] = field(default_factory=list)
    underflow: int = 0
    overflow: int = 0
    total_samples: int = 0

    def __post_init__(self):
        if not self.counts:
            self.counts = [0] * self.config.n_bins
        elif len(self.counts) != self.config.n_bins:
            raise ConfigError(
                f"histogram has {len(self.counts)} counts for {self.config.n_bins} bins"
            )
        self._edges = self.config.edges()

    @property
    def bin_edges(self) -> list[float]:
        return list(self._edges)

    def add_value(self, value: float) -> None:
        if value < self._edges[0]:
            self.underflow += 1
        elif value >= self._edges[-1]:
            self.overflow += 1
        else:
            self.counts[bisect_right(self._edges, value) - 1] += 1
        self.total_samples += 1

    def add_sample(self, sample: PairSample) -> None:
        """Count one pair sample; pairs not strictly converging are skipped."""
        if sample.closing_speed > 0.0:
            self.add_value(sample.m2 if self.config.measure == "m2" else sample.m3)

    def merge(self, other: "HazardHistogram") -> "HazardHistogram":
        """Combine two partial histograms built over the same bin config."""
        if other.config != self.config:
            raise ConfigError("cannot merge histograms with different bin configs")
        return HazardHistogram(
            config=self.config,
            counts=[a + b for a, b in zip(self.counts, other.counts)],
            underflow=self.underflow + other.underflow,
            overflow=self.overflow + other.overflow,
            total_samples=self.total_samples + other.total_samples,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HazardHistogram):
            return NotImplemented
        return (
            self.config == other.config
            and self.counts == other.counts
            and self.underflow == other.underflow
            and self.overflow == other.overflow
            and self.total_samples == other.total_samples
        )


def build_histogram(
    samples: Iterable[PairSample],
    config: HistogramConfig = DEFAULT_HISTOGRAM_CONFIG,
) -> HazardHistogram:
    """Accumulate a histogram from a sample stream (order-independent)."""
    hist = HazardHistogram(config=config)
    for sample in samples:
        hist.add_sample(sample)
    return hist


@dataclass(frozen=True)
class PairSeries:
    """Time series of one object's hazard values against the subject."""

    object_id: str
    points: tuple[tuple[float, float, float, float, float, HazardClass], ...]
    """(t, m2, m3, d_sep, closing_speed, hazard_class) per frame seen."""


def series_per_object(samples: Iterable[PairSample]) -> list[PairSeries]:
    """Group a time-ordered sample stream into one series per object id.

    Series appear in first-encounter order; an object visible in only some
    frames yields a series covering just those frames.
    """
    grouped: dict[str, list[tuple[float, float, float, float, float, HazardClass]]] = {}
    for s in samples:
        grouped.setdefault(s.object_id, []).append(
            (s.t, s.m2, s.m3, s.d_sep, s.closing_speed, s.hazard_class)
        )
    return [PairSeries(object_id=oid, points=tuple(pts)) for oid, pts in grouped.items()]


@dataclass(frozen=True)
class ScenarioSummary:
    """Headline numbers for one scenario's sample stream."""

    max_m3: float
    max_m3_t: Optional[float]
    max_m3_object_id: Optional[str]
    class_counts: dict[str, int]
    converging_fraction: float
    min_d_sep: Optional[float]
    collision_count: int
    total_samples: int


def summarize(samples: Iterable[PairSample]) -> ScenarioSummary:
    """Single-pass summary; max ties break on earliest t, then object id."""
    max_m3 = 0.0
    max_t: Optional[float] = None
    max_id: Optional[str] = None
    class_counts = {cls.label: 0 for cls in HazardClass}
    converging = 0
    min_d: Optional[float] = None
    collisions = 0
    total = 0

    for s in samples:
        total += 1
        class_counts[s.hazard_class.label] += 1
        if s.closing_speed > 0.0:
            converging += 1
        if s.collision:
            collisions += 1
        if min_d is None or s.d_sep < min_d:
            min_d = s.d_sep
        if counts_toward_max(s):
            better = s.m3 > max_m3 or (
                s.m3 == max_m3
                and max_t is not None
                and (s.t < max_t or (s.t == max_t and s.object_id < max_id))
            )
            if max_t is None and s.m3 >= max_m3:
                better = True
            if better:
                max_m3 = s.m3
                max_t = s.t
                max_id = s.object_id

    return ScenarioSummary(
        max_m3=max_m3,
        max_m3_t=max_t,
        max_m3_object_id=max_id,
        class_counts=class_counts,
        converging_fraction=(converging / total) if total else 0.0,
        min_d_sep=min_d,
        collision_count=collisions,
        total_samples=total,
    )


def frame_maxima(samples: Iterable[PairSample]) -> list[tuple[float, float]]:
    """Per-frame (t, max m3) over non-diverging samples; 0.0 where none."""
    maxima: dict[float, float] = {}
    for s in samples:
        current = maxima.setdefault(s.t, 0.0)
        if counts_toward_max(s) and s.m3 > current:
            maxima[s.t] = s.m3
    return list(maxima.items())


def running_maxima(per_frame: Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    """Cumulative maximum of the per-frame maxima, in input order."""
    out: list[tuple[float, float]] = []
    best = 0.0
    for t, value in per_frame:
        if value > best:
            best = value
        out.append((t, best))
    return out
