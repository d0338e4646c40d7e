"""The collision hazard measures and per-pair/per-frame evaluation.

Two measures are computed for every (subject, object) pair at every frame,
both in units of acceleration (m/s^2):

* ``m2``: relative speed squared over separation distance. The square
  tracks the kinetic energy available to a potential impact.
* ``m3``: the augmented measure, which substitutes the subject's absolute
  speed when that exceeds the relative speed, so that driving fast past
  something slow still registers. Classification and histograms run on
  m3; m2 is retained for analysis.

Separation distance is floored at ``D_FLOOR`` before dividing so contact
events stay finite and maximal; an actual contact (raw separation under
the floor) is reported through the separate ``collision`` flag.

Class bands compare m3 against configured thresholds. A pair that is
moving apart (or exactly holding distance) and not in contact carries
class NO_HAZARD no matter its measure values; the values themselves are
still reported for completeness.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Optional

from .core import ConfigError, FrameSnapshot, ObjectState, Scenario
from .kinematics import pair_geometry, relative_speed_magnitude

#: Division floor for separation distance, meters.
D_FLOOR = 0.01


class HazardClass(IntEnum):
    """Severity band of one pair sample; ordering is meaningful."""

    NO_HAZARD = 0
    SAFE = 1
    HAZARDOUS = 2
    UNSAFE = 3

    @property
    def label(self) -> str:
        return _CLASS_LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "HazardClass":
        try:
            return _CLASS_BY_LABEL[label]
        except KeyError:
            raise ValueError(f"unknown hazard class label: {label!r}") from None


_CLASS_LABELS = {
    HazardClass.NO_HAZARD: "NoHazard",
    HazardClass.SAFE: "Safe",
    HazardClass.HAZARDOUS: "Hazardous",
    HazardClass.UNSAFE: "Unsafe",
}
_CLASS_BY_LABEL = {v: k for k, v in _CLASS_LABELS.items()}


@dataclass(frozen=True)
class HazardThresholds:
    """Class band boundaries in m/s^2.

    Values at a boundary classify into the band below it: m3 == safe_max
    is Safe, m3 == hazardous_max is Hazardous. Defaults are illustrative,
    not normative; real deployments set their own.
    """

    safe_max: float = 10.0
    hazardous_max: float = 100.0

    def __post_init__(self):
        if not (0.0 < self.safe_max < self.hazardous_max):
            raise ConfigError(
                "thresholds must satisfy 0 < safe_max < hazardous_max, got "
                f"safe_max={self.safe_max}, hazardous_max={self.hazardous_max}"
            )


DEFAULT_THRESHOLDS = HazardThresholds()


@dataclass(frozen=True)
class PairSample:
    """One (subject, object, frame) hazard evaluation.

    ``d_sep`` is the floored separation actually used in the measures;
    ``collision`` records whether the raw separation fell under the floor.
    """

    t: float
    subject_id: str
    object_id: str
    d_sep: float
    closing_speed: float
    s_rel: float
    s_abs: float
    m2: float
    m3: float
    hazard_class: HazardClass
    collision: bool


def measure_m2(s_rel: float, d_sep: float) -> float:
    """Relative speed squared over (floored) separation distance, m/s^2."""
    return s_rel * s_rel / max(d_sep, D_FLOOR)


def measure_m3(s_abs: float, s_rel: float, d_sep: float) -> float:
    """Augmented measure: max(absolute, relative) speed squared over distance."""
    s = max(s_abs, s_rel)
    return s * s / max(d_sep, D_FLOOR)


def classify(m3: float, closing_speed: float, collision: bool, thresholds: HazardThresholds) -> HazardClass:
    """Band a sample: NO_HAZARD for non-converging contact-free pairs."""
    if closing_speed <= 0.0 and not collision:
        return HazardClass.NO_HAZARD
    if m3 <= thresholds.safe_max:
        return HazardClass.SAFE
    if m3 <= thresholds.hazardous_max:
        return HazardClass.HAZARDOUS
    return HazardClass.UNSAFE


def evaluate_pair(
    subject: ObjectState,
    obj: ObjectState,
    t: float,
    thresholds: HazardThresholds = DEFAULT_THRESHOLDS,
) -> PairSample:
    """Score one pair at one instant from current-frame state only."""
    g = pair_geometry(subject, obj)
    s_rel = relative_speed_magnitude(g)
    collision = g.d_sep < D_FLOOR
    m2 = measure_m2(s_rel, g.d_sep)
    m3 = measure_m3(g.s_abs, s_rel, g.d_sep)
    return PairSample(
        t=t,
        subject_id=subject.id,
        object_id=obj.id,
        d_sep=max(g.d_sep, D_FLOOR),
        closing_speed=g.closing_speed,
        s_rel=s_rel,
        s_abs=g.s_abs,
        m2=m2,
        m3=m3,
        hazard_class=classify(m3, g.closing_speed, collision, thresholds),
        collision=collision,
    )


def counts_toward_max(sample: PairSample) -> bool:
    """Whether a sample participates in frame/scenario maxima.

    Pairs moving apart are excluded (an all-diverging frame reports a max
    of zero); pairs exactly holding distance are included so the closest
    approach of a drive-past registers at its full value.
    """
    return sample.closing_speed >= 0.0 or sample.collision


def evaluate_frame(
    frame: FrameSnapshot,
    thresholds: HazardThresholds = DEFAULT_THRESHOLDS,
) -> tuple[list[PairSample], float]:
    """Score the subject against every object in one frame.

    Returns the samples in input order plus the frame maximum of m3 over
    non-diverging samples (0.0 when every pair is moving apart).
    """
    samples = [
        evaluate_pair(frame.subject, obj, frame.t, thresholds)
        for obj in frame.objects
    ]
    frame_max = 0.0
    for s in samples:
        if counts_toward_max(s) and s.m3 > frame_max:
            frame_max = s.m3
    return samples, frame_max


def evaluate_scenario(
    scenario: Scenario,
    thresholds: HazardThresholds = DEFAULT_THRESHOLDS,
    backend: Optional[str] = None,
) -> list[PairSample]:
    """Score every frame of a scenario, in frame order then object order.

    ``backend`` selects the evaluation path: "python" walks frames through
    :func:`evaluate_frame`; "numpy" and "numba" run the flat array kernels
    in :mod:`nearmiss._kernels`. Default comes from the NEARMISS_BACKEND
    environment variable, falling back to numba when available. All
    backends produce bit-identical samples.
    """
    from . import _kernels

    resolved = _kernels.resolve_backend(backend)
    if resolved == "python":
        out: list[PairSample] = []
        for frame in scenario.frames:
            samples, _ = evaluate_frame(frame, thresholds)
            out.extend(samples)
        return out
    return _kernels.evaluate_scenario_arrays(scenario, thresholds, resolved)


def stream_samples(
    scenario: Scenario,
    thresholds: HazardThresholds = DEFAULT_THRESHOLDS,
) -> Iterable[PairSample]:
    """Lazily yield samples frame by frame (python path only)."""
    for frame in scenario.frames:
        samples, _ = evaluate_frame(frame, thresholds)
        yield from samples
