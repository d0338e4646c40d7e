"""Deterministic synthetic scenario generator.

Four constant-velocity templates cover the interesting regimes of the
hazard measure while keeping closed-form oracles:

* ``pass_by``: subject drives straight past a stationary pedestrian at a
  lateral offset; minimum separation equals the offset exactly, and the
  closest approach lands on a frame.
* ``car_following``: subject closes on a slower lead car on a shared
  straight path (collinear TTC geometry).
* ``intersection_crossing``: subject crosses a 4-way intersection while a
  second car crosses perpendicular, timed to miss; ``miss`` is how many
  meters short of the conflict point the crosser is when the subject
  passes through it.
* ``diverging_control``: every object moves away from the subject at all
  times, so every sample classifies as no-hazard.

Positions are never integrated stepwise: each state is p0 + v*t from the
template's initial conditions, so trajectories carry no accumulation
error and regeneration is bit-reproducible. The seed only matters when a
positive ``jitter`` asks for randomized initial-position offsets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ConfigError, FrameSnapshot, ObjectKind, ObjectState, Scenario, Vec2

TEMPLATES = ("pass_by", "car_following", "intersection_crossing", "diverging_control")

SUBJECT_ID = "ego"


@dataclass(frozen=True)
class GeneratorSpec:
    """Template choice plus its parameters; unset ones take template defaults.

    speed: subject speed (m/s) in every template.
    offset: pass_by lateral clearance (m).
    cross_speed / miss: intersection crosser speed (m/s) and timing gap (m).
    lead_speed / gap: car_following lead speed (m/s) and initial gap (m).
    jitter: half-width (m) of a uniform random offset applied once to each
    traffic object's initial position, drawn from ``seed``.
    """

    template: str
    frame_rate: float = 20.0
    duration: float = 12.0
    seed: int = 0
    jitter: float = 0.0
    speed: Optional[float] = None
    offset: Optional[float] = None
    cross_speed: Optional[float] = None
    miss: Optional[float] = None
    lead_speed: Optional[float] = None
    gap: Optional[float] = None

    def __post_init__(self):
        if self.template not in TEMPLATES:
            raise ConfigError(
                f"unknown template {self.template!r}; expected one of {', '.join(TEMPLATES)}"
            )
        if not (self.frame_rate > 0.0 and math.isfinite(self.frame_rate)):
            raise ConfigError(f"frame_rate must be positive, got {self.frame_rate}")
        if not (self.duration > 0.0 and math.isfinite(self.duration)):
            raise ConfigError(f"duration must be positive, got {self.duration}")
        if self.jitter < 0.0 or not math.isfinite(self.jitter):
            raise ConfigError(f"jitter must be >= 0, got {self.jitter}")
        for name in ("speed", "offset", "cross_speed", "miss", "lead_speed", "gap"):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value}")


_DEFAULTS = {
    "pass_by": {"speed": 30.0, "offset": 1.0},
    "car_following": {"speed": 20.0, "lead_speed": 17.0, "gap": 50.0},
    "intersection_crossing": {"speed": 10.0, "cross_speed": 10.0, "miss": 2.0},
    "diverging_control": {"speed": 10.0},
}


def _param(spec: GeneratorSpec, name: str) -> float:
    value = getattr(spec, name)
    if value is None:
        value = _DEFAULTS[spec.template][name]
    return float(value)


@dataclass(frozen=True)
class _Body:
    """Initial conditions of one constant-velocity participant."""

    id: str
    kind: ObjectKind
    p0: Vec2
    v: Vec2


def _template_bodies(spec: GeneratorSpec, t_mid: float) -> tuple[_Body, list[_Body]]:
    speed = _param(spec, "speed")

    if spec.template == "pass_by":
        offset = _param(spec, "offset")
        subject = _Body(
            SUBJECT_ID, ObjectKind.CAR, Vec2(-(speed * t_mid), 0.0), Vec2(speed, 0.0)
        )
        walker = _Body("walker", ObjectKind.PEDESTRIAN, Vec2(0.0, offset), Vec2(0.0, 0.0))
        return subject, [walker]

    if spec.template == "car_following":
        lead_speed = _param(spec, "lead_speed")
        gap = _param(spec, "gap")
        subject = _Body(SUBJECT_ID, ObjectKind.CAR, Vec2(0.0, 0.0), Vec2(speed, 0.0))
        lead = _Body("lead", ObjectKind.CAR, Vec2(gap, 0.0), Vec2(lead_speed, 0.0))
        return subject, [lead]

    if spec.template == "intersection_crossing":
        cross_speed = _param(spec, "cross_speed")
        miss = _param(spec, "miss")
        subject = _Body(
            SUBJECT_ID, ObjectKind.CAR, Vec2(-(speed * t_mid), 0.0), Vec2(speed, 0.0)
        )
        crosser = _Body(
            "crosser",
            ObjectKind.CAR,
            Vec2(0.0, -(cross_speed * t_mid + miss)),
            Vec2(0.0, cross_speed),
        )
        return subject, [crosser]

    # diverging_control
    subject = _Body(SUBJECT_ID, ObjectKind.CAR, Vec2(0.0, 0.0), Vec2(speed, 0.0))
    objects = [
        _Body("rear", ObjectKind.CAR, Vec2(-30.0, 0.0), Vec2(-speed, 0.0)),
        _Body("ahead", ObjectKind.CAR, Vec2(30.0, 0.0), Vec2(2.0 * speed, 0.0)),
        _Body("north", ObjectKind.PEDESTRIAN, Vec2(0.0, 20.0), Vec2(0.0, 2.0)),
        _Body("hydrant", ObjectKind.STATIONARY, Vec2(-20.0, 5.0), Vec2(0.0, 0.0)),
    ]
    return subject, objects


def _metadata(spec: GeneratorSpec) -> dict[str, str]:
    meta = {
        "template": spec.template,
        "frame_rate": repr(spec.frame_rate),
        "duration": repr(spec.duration),
        "seed": repr(spec.seed),
        "jitter": repr(spec.jitter),
    }
    for name in _DEFAULTS[spec.template]:
        meta[name] = repr(_param(spec, name))
    return meta


def generate(spec: GeneratorSpec) -> Scenario:
    """Build the scenario for a spec; same spec and seed, same scenario."""
    n_frames = int(round(spec.duration * spec.frame_rate)) + 1
    k_mid = n_frames // 2
    t_mid = k_mid / spec.frame_rate

    subject, objects = _template_bodies(spec, t_mid)

    if spec.jitter > 0.0:
        rng = np.random.default_rng(spec.seed)
        jittered = []
        for body in objects:
            dx, dy = rng.uniform(-spec.jitter, spec.jitter, size=2)
            jittered.append(
                _Body(body.id, body.kind, Vec2(body.p0.x + dx, body.p0.y + dy), body.v)
            )
        objects = jittered

    bodies = [subject] + objects
    for i, a in enumerate(bodies):
        for b in bodies[i + 1 :]:
            if a.p0.x == b.p0.x and a.p0.y == b.p0.y:
                raise ConfigError(
                    f"objects {a.id!r} and {b.id!r} are co-located at t=0"
                )

    frames = []
    for k in range(n_frames):
        t = k / spec.frame_rate
        frames.append(
            FrameSnapshot(
                t=t,
                subject=_state_at(subject, t),
                objects=[_state_at(body, t) for body in objects],
            )
        )
    return Scenario(name=spec.template, frames=frames, metadata=_metadata(spec))


def _state_at(body: _Body, t: float) -> ObjectState:
    return ObjectState(
        id=body.id,
        kind=body.kind,
        position=Vec2(body.p0.x + body.v.x * t, body.p0.y + body.v.y * t),
        velocity=body.v,
    )
