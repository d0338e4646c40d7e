"""Core domain types: traffic objects, frames, scenarios, and validation.

Everything here is an immutable value type. Invariant breaches other than
non-finite coordinates do not raise at construction time; they are reported
as :class:`Violation` records by :func:`validate_scenario` so that callers
can collect every problem in a file at once instead of failing on the first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence


class NearMissError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(NearMissError):
    """Invalid configuration value (thresholds, bins, generator spec)."""


class ParseError(NearMissError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(NearMissError):
    """A structurally parseable scenario that breaks a domain invariant."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:10])
        extra = len(self.violations) - 10
        if extra > 0:
            lines += f"; and {extra} more"
        super().__init__(f"{len(self.violations)} violation(s): {lines}")


@dataclass(frozen=True)
class Vec2:
    """Planar vector in meters (or m/s when used as a velocity).

    Components must be finite; NaN/Inf never get past construction.
    """

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite vector component: ({self.x}, {self.y})")

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y)

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y


class ObjectKind(Enum):
    """Closed set of participant categories. Unknown inputs map to OTHER."""

    CAR = "car"
    BUS = "bus"
    BICYCLE = "bicycle"
    PEDESTRIAN = "pedestrian"
    STATIONARY = "stationary"
    OTHER = "other"

    @classmethod
    def parse(cls, label: str) -> "ObjectKind":
        """Map a wire label to a kind; anything unrecognized becomes OTHER."""
        try:
            return cls(label)
        except ValueError:
            return cls.OTHER


@dataclass(frozen=True)
class ObjectState:
    """One participant at one instant: identity, kind, position, velocity.

    ``half_extent`` optionally attaches an axis-aligned bounding half-size in
    meters; when both members of a pair carry one, separation distance is
    measured between the closest points of the two boxes instead of between
    the center points.
    """

    id: str
    kind: ObjectKind
    position: Vec2
    velocity: Vec2
    half_extent: Optional[Vec2] = None


@dataclass(frozen=True)
class FrameSnapshot:
    """Timestamped state of the subject vehicle plus all visible objects."""

    t: float
    subject: ObjectState
    objects: tuple[ObjectState, ...]

    def __init__(self, t: float, subject: ObjectState, objects: Sequence[ObjectState]):
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "subject", subject)
        object.__setattr__(self, "objects", tuple(objects))


@dataclass(frozen=True)
class Scenario:
    """Named, time-ordered trajectory corpus."""

    name: str
    frames: tuple[FrameSnapshot, ...]
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __init__(
        self,
        name: str,
        frames: Sequence[FrameSnapshot],
        metadata: Optional[Mapping[str, str]] = None,
    ):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "frames", tuple(frames))
        object.__setattr__(self, "metadata", dict(metadata or {}))


@dataclass(frozen=True)
class Violation:
    """One broken invariant: which rule, where, and on what object."""

    rule: str
    frame: Optional[int] = None
    object_id: Optional[str] = None
    detail: str = ""

    def __str__(self) -> str:
        where = [] if self.frame is None else [f"frame {self.frame}"]
        if self.object_id is not None:
            where.append(f"object {self.object_id!r}")
        loc = f" ({', '.join(where)})" if where else ""
        msg = f": {self.detail}" if self.detail else ""
        return f"{self.rule}{loc}{msg}"


# Rule names used by validate_scenario.
RULE_NON_MONOTONE_TIME = "non_monotone_time"
RULE_DUPLICATE_ID = "duplicate_id"
RULE_EMPTY_ID = "empty_id"
RULE_SUBJECT_IN_OBJECTS = "subject_in_objects"
RULE_SUBJECT_ID_CHANGED = "subject_id_changed"
RULE_NON_FINITE = "non_finite"
RULE_NEGATIVE_EXTENT = "negative_extent"


def _check_state(state: ObjectState, frame_idx: int, out: list[Violation]) -> None:
    if not state.id:
        out.append(Violation(RULE_EMPTY_ID, frame_idx, state.id, "object id is empty"))
    for vec in (state.position, state.velocity):
        if not (math.isfinite(vec.x) and math.isfinite(vec.y)):
            out.append(
                Violation(RULE_NON_FINITE, frame_idx, state.id, "non-finite state")
            )
            break
    if state.half_extent is not None:
        hx, hy = state.half_extent.x, state.half_extent.y
        if not (math.isfinite(hx) and math.isfinite(hy)):
            out.append(
                Violation(RULE_NON_FINITE, frame_idx, state.id, "non-finite extent")
            )
        elif hx < 0 or hy < 0:
            out.append(
                Violation(
                    RULE_NEGATIVE_EXTENT,
                    frame_idx,
                    state.id,
                    f"half extent ({hx}, {hy}) has a negative component",
                )
            )


def validate_scenario(scenario: Scenario) -> list[Violation]:
    """Check every domain invariant and return all breaches as data.

    Returns an empty list iff the scenario is well formed. Idempotent and
    side-effect free; a scenario that passes is processable by every
    downstream operation.
    """
    violations: list[Violation] = []
    prev_t: Optional[float] = None
    subject_id: Optional[str] = None

    for i, frame in enumerate(scenario.frames):
        if prev_t is not None and not (frame.t > prev_t):
            violations.append(
                Violation(
                    RULE_NON_MONOTONE_TIME,
                    i,
                    None,
                    f"t={frame.t} does not increase past {prev_t}",
                )
            )
        prev_t = frame.t

        if subject_id is None:
            subject_id = frame.subject.id
        elif frame.subject.id != subject_id:
            violations.append(
                Violation(
                    RULE_SUBJECT_ID_CHANGED,
                    i,
                    frame.subject.id,
                    f"subject id changed from {subject_id!r}",
                )
            )

        _check_state(frame.subject, i, violations)
        seen: set[str] = set()
        for obj in frame.objects:
            _check_state(obj, i, violations)
            if obj.id in seen:
                violations.append(
                    Violation(RULE_DUPLICATE_ID, i, obj.id, "duplicate object id")
                )
            seen.add(obj.id)
            if obj.id == frame.subject.id:
                violations.append(
                    Violation(
                        RULE_SUBJECT_IN_OBJECTS,
                        i,
                        obj.id,
                        "subject id listed among traffic objects",
                    )
                )

    return violations
