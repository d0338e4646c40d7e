"""Time-to-collision baseline and its ranking-inversion demonstration.

TTC here is the minimal constant-velocity point-closure form: separation
distance divided by closing speed, defined only while the pair converges.
It exists as a comparison baseline; the built-in witness pair shows why it
is kept out of the hazard scoring path: TTC is blind to impact energy, so
it can rank a fast, energetic approach as less urgent than a slow nudge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import ObjectKind, ObjectState, Vec2
from .hazard import measure_m2
from .kinematics import PairGeometry, pair_geometry, relative_speed_magnitude


@dataclass(frozen=True)
class TtcSample:
    """TTC for one (subject, object, frame); None while not converging."""

    t: float
    object_id: str
    ttc: Optional[float]


def ttc(g: PairGeometry) -> Optional[float]:
    """Seconds until contact at current closure rate; None if not converging.

    Zero separation with positive closing yields 0.0 (contact now).
    """
    if g.closing_speed > 0.0:
        return g.d_sep / g.closing_speed
    return None


def ttc_for_pair(subject: ObjectState, obj: ObjectState, t: float) -> TtcSample:
    return TtcSample(t=t, object_id=obj.id, ttc=ttc(pair_geometry(subject, obj)))


@dataclass(frozen=True)
class WitnessEncounter:
    """One head-on constant-velocity encounter with its two scores."""

    label: str
    subject: ObjectState
    obj: ObjectState
    d_sep: float
    closing_speed: float
    ttc: float
    m2: float


@dataclass(frozen=True)
class WitnessReport:
    """Summary of the ranking inversion between TTC and the hazard measure."""

    ttc_a: float
    ttc_b: float
    m2_a: float
    m2_b: float

    @property
    def inversion_holds(self) -> bool:
        """TTC flags B as more urgent while m2 flags A as more hazardous."""
        return self.ttc_b < self.ttc_a and self.m2_b < self.m2_a


def non_monotonicity_witness() -> tuple[WitnessEncounter, WitnessEncounter, WitnessReport]:
    """Two encounters that TTC ranks opposite to the hazard measure.

    A: closing at 35 m/s from 70 m out (high energy, TTC 2.0 s).
    B: closing at 1 m/s from 1.5 m out (a creep, TTC 1.5 s).
    TTC calls B the more urgent conflict; m2 scores A an order of
    magnitude more hazardous.
    """
    a = _head_on("A", d_sep=70.0, speed=35.0)
    b = _head_on("B", d_sep=1.5, speed=1.0)
    report = WitnessReport(ttc_a=a.ttc, ttc_b=b.ttc, m2_a=a.m2, m2_b=b.m2)
    return a, b, report


def _head_on(label: str, d_sep: float, speed: float) -> WitnessEncounter:
    subject = ObjectState(
        id="ego",
        kind=ObjectKind.CAR,
        position=Vec2(0.0, 0.0),
        velocity=Vec2(speed, 0.0),
    )
    obj = ObjectState(
        id="obstacle",
        kind=ObjectKind.CAR,
        position=Vec2(d_sep, 0.0),
        velocity=Vec2(0.0, 0.0),
    )
    g = pair_geometry(subject, obj)
    t = ttc(g)
    assert t is not None  # head-on by construction
    return WitnessEncounter(
        label=label,
        subject=subject,
        obj=obj,
        d_sep=g.d_sep,
        closing_speed=g.closing_speed,
        ttc=t,
        m2=measure_m2(relative_speed_magnitude(g), g.d_sep),
    )
