"""Pairwise geometric and kinematic primitives.

Conventions, used consistently everywhere downstream:

* ``u`` points from the subject toward the object.
* ``closing_speed`` is signed: positive means the gap is shrinking
  (equal to minus the time derivative of the separation distance for
  point objects); negative means the pair is moving apart.
* Speeds projected on the line of sight keep their sign; the relative
  speed fed to the hazard measures is the magnitude ``|closing_speed|``.

When both states carry a bounding half-extent, separation distance becomes
the gap between the closest points of the two axis-aligned boxes (floored
at zero on overlap); the line-of-sight direction is still taken between
the center points.

The arithmetic here is deliberately written operation-for-operation the
same as the array kernels in ``_kernels`` so that scalar and vectorized
evaluation produce bit-identical doubles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ObjectState, Vec2


@dataclass(frozen=True)
class PairGeometry:
    """Instantaneous geometry of one (subject, object) pair.

    d_sep is the raw separation in meters (never floored here); u is the
    subject-to-object unit direction, or the zero vector when the centers
    coincide; speeds are in m/s.
    """

    d_sep: float
    u: Vec2
    s_subject: float
    s_object: float
    closing_speed: float
    s_abs: float


def separation_distance(p_v: Vec2, p_o: Vec2) -> float:
    """Euclidean distance between two center points, in meters."""
    dx = p_o.x - p_v.x
    dy = p_o.y - p_v.y
    return math.sqrt(dx * dx + dy * dy)


def _box_gap(delta: float, extent_sum: float) -> float:
    """Per-axis gap between two axis-aligned boxes, floored at contact."""
    return max(abs(delta) - extent_sum, 0.0)


def pair_geometry(subject: ObjectState, obj: ObjectState) -> PairGeometry:
    """Compute separation, line-of-sight direction, and projected speeds.

    With coincident centers the direction is undefined; u is then the zero
    vector and every projection is zero, leaving collision handling to the
    hazard layer.
    """
    dx = obj.position.x - subject.position.x
    dy = obj.position.y - subject.position.y

    shx = subject.half_extent.x if subject.half_extent is not None else 0.0
    shy = subject.half_extent.y if subject.half_extent is not None else 0.0
    ohx = obj.half_extent.x if obj.half_extent is not None else 0.0
    ohy = obj.half_extent.y if obj.half_extent is not None else 0.0

    gx = _box_gap(dx, shx + ohx)
    gy = _box_gap(dy, shy + ohy)
    d_sep = math.sqrt(gx * gx + gy * gy)

    dc = math.sqrt(dx * dx + dy * dy)
    if dc > 0.0:
        ux = dx / dc
        uy = dy / dc
    else:
        ux = 0.0
        uy = 0.0

    s_subject = subject.velocity.x * ux + subject.velocity.y * uy
    s_object = obj.velocity.x * ux + obj.velocity.y * uy
    closing_speed = s_subject - s_object
    s_abs = math.sqrt(
        subject.velocity.x * subject.velocity.x
        + subject.velocity.y * subject.velocity.y
    )

    return PairGeometry(
        d_sep=d_sep,
        u=Vec2(ux, uy),
        s_subject=s_subject,
        s_object=s_object,
        closing_speed=closing_speed,
        s_abs=s_abs,
    )


def relative_speed_magnitude(g: PairGeometry) -> float:
    """Non-negative relative speed consumed by the hazard measures."""
    return abs(g.closing_speed)
