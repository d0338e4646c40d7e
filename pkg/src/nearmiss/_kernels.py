"""Flat array evaluation kernels: numba-jitted hot loop plus a pure-numpy twin.

Scenarios are flattened to one row per (frame, object) pair and pushed
through element-wise float64 arithmetic. Every expression mirrors the
scalar path in ``kinematics``/``hazard`` operation for operation, so all
three backends produce bit-identical doubles; tests assert this.

Backend selection order: explicit argument, then the NEARMISS_BACKEND
environment variable ("python", "numpy", or "numba"), then numba when
importable, else numpy.
"""

from __future__ import annotations

import os
from typing import Optional

import numpy as np

from .core import ConfigError, Scenario
from .hazard import D_FLOOR, HazardClass, HazardThresholds, PairSample

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        return wrap


ENV_BACKEND = "NEARMISS_BACKEND"
BACKENDS = ("python", "numpy", "numba")


def available_backends() -> tuple[str, ...]:
    return BACKENDS if HAVE_NUMBA else ("python", "numpy")


def resolve_backend(name: Optional[str] = None) -> str:
    """Pick the evaluation backend; explicit arg wins over the env flag."""
    if name is None:
        name = os.environ.get(ENV_BACKEND)
    if name is None:
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in BACKENDS:
        raise ConfigError(
            f"unknown backend {name!r}; expected one of {', '.join(BACKENDS)}"
        )
    if name == "numba" and not HAVE_NUMBA:
        raise ConfigError("backend 'numba' requested but numba is not importable")
    return name


def _flatten(scenario: Scenario):
    """One row per (frame, object) pair, plus the id metadata for rebuild."""
    ts: list[float] = []
    subject_ids: list[str] = []
    object_ids: list[str] = []
    cols: list[list[float]] = [[] for _ in range(12)]
    (sx, sy, svx, svy, shx, shy, ox, oy, ovx, ovy, ohx, ohy) = cols

    for frame in scenario.frames:
        sub = frame.subject
        sub_hx = sub.half_extent.x if sub.half_extent is not None else 0.0
        sub_hy = sub.half_extent.y if sub.half_extent is not None else 0.0
        for obj in frame.objects:
            ts.append(frame.t)
            subject_ids.append(sub.id)
            object_ids.append(obj.id)
            sx.append(sub.position.x)
            sy.append(sub.position.y)
            svx.append(sub.velocity.x)
            svy.append(sub.velocity.y)
            shx.append(sub_hx)
            shy.append(sub_hy)
            ox.append(obj.position.x)
            oy.append(obj.position.y)
            ovx.append(obj.velocity.x)
            ovy.append(obj.velocity.y)
            ohx.append(obj.half_extent.x if obj.half_extent is not None else 0.0)
            ohy.append(obj.half_extent.y if obj.half_extent is not None else 0.0)

    arrays = tuple(np.asarray(c, dtype=np.float64) for c in cols)
    return ts, subject_ids, object_ids, arrays


def _compute_numpy(arrays, floor, safe_max, hazardous_max):
    sx, sy, svx, svy, shx, shy, ox, oy, ovx, ovy, ohx, ohy = arrays

    dx = ox - sx
    dy = oy - sy
    gx = np.maximum(np.abs(dx) - (shx + ohx), 0.0)
    gy = np.maximum(np.abs(dy) - (shy + ohy), 0.0)
    d_raw = np.sqrt(gx * gx + gy * gy)

    dc = np.sqrt(dx * dx + dy * dy)
    positive = dc > 0.0
    safe_dc = np.where(positive, dc, 1.0)
    ux = np.where(positive, dx / safe_dc, 0.0)
    uy = np.where(positive, dy / safe_dc, 0.0)

    s_sub = svx * ux + svy * uy
    s_obj = ovx * ux + ovy * uy
    closing = s_sub - s_obj
    s_rel = np.abs(closing)
    s_abs = np.sqrt(svx * svx + svy * svy)

    collision = d_raw < floor
    d = np.maximum(d_raw, floor)
    m2 = s_rel * s_rel / d
    smax = np.maximum(s_abs, s_rel)
    m3 = smax * smax / d

    cls = np.where(
        (closing <= 0.0) & ~collision,
        np.uint8(0),
        np.where(m3 <= safe_max, np.uint8(1), np.where(m3 <= hazardous_max, np.uint8(2), np.uint8(3))),
    ).astype(np.uint8)

    return d, closing, s_rel, s_abs, m2, m3, cls, collision


@njit(cache=True)
def _compute_numba(
    sx, sy, svx, svy, shx, shy, ox, oy, ovx, ovy, ohx, ohy, floor, safe_max, hazardous_max
):  # pragma: no cover - covered via backend equivalence tests
    n = sx.shape[0]
    d = np.empty(n, dtype=np.float64)
    closing = np.empty(n, dtype=np.float64)
    s_rel = np.empty(n, dtype=np.float64)
    s_abs = np.empty(n, dtype=np.float64)
    m2 = np.empty(n, dtype=np.float64)
    m3 = np.empty(n, dtype=np.float64)
    cls = np.empty(n, dtype=np.uint8)
    collision = np.empty(n, dtype=np.bool_)

    for i in range(n):
        dx = ox[i] - sx[i]
        dy = oy[i] - sy[i]
        gx = abs(dx) - (shx[i] + ohx[i])
        if gx < 0.0:
            gx = 0.0
        gy = abs(dy) - (shy[i] + ohy[i])
        if gy < 0.0:
            gy = 0.0
        d_raw = np.sqrt(gx * gx + gy * gy)

        dc = np.sqrt(dx * dx + dy * dy)
        if dc > 0.0:
            ux = dx / dc
            uy = dy / dc
        else:
            ux = 0.0
            uy = 0.0

        s_sub = svx[i] * ux + svy[i] * uy
        s_obj = ovx[i] * ux + ovy[i] * uy
        c = s_sub - s_obj
        sr = abs(c)
        sa = np.sqrt(svx[i] * svx[i] + svy[i] * svy[i])

        hit = d_raw < floor
        dd = d_raw if d_raw > floor else floor
        v2 = sr * sr / dd
        sm = sa if sa > sr else sr
        v3 = sm * sm / dd

        if c <= 0.0 and not hit:
            band = 0
        elif v3 <= safe_max:
            band = 1
        elif v3 <= hazardous_max:
            band = 2
        else:
            band = 3

        d[i] = dd
        closing[i] = c
        s_rel[i] = sr
        s_abs[i] = sa
        m2[i] = v2
        m3[i] = v3
        cls[i] = band
        collision[i] = hit

    return d, closing, s_rel, s_abs, m2, m3, cls, collision


def evaluate_scenario_arrays(
    scenario: Scenario, thresholds: HazardThresholds, backend: str
) -> list[PairSample]:
    """Flatten, run the selected kernel, and rebuild PairSample records."""
    ts, subject_ids, object_ids, arrays = _flatten(scenario)

    if backend == "numpy":
        d, closing, s_rel, s_abs, m2, m3, cls, collision = _compute_numpy(
            arrays, D_FLOOR, thresholds.safe_max, thresholds.hazardous_max
        )
    elif backend == "numba":
        d, closing, s_rel, s_abs, m2, m3, cls, collision = _compute_numba(
            *arrays, D_FLOOR, thresholds.safe_max, thresholds.hazardous_max
        )
    else:
        raise ConfigError(f"not an array backend: {backend!r}")

    # .tolist() converts to native floats in C; much faster than per-item float().
    return [
        PairSample(
            t=t,
            subject_id=sid,
            object_id=oid,
            d_sep=dv,
            closing_speed=cv,
            s_rel=srv,
            s_abs=sav,
            m2=m2v,
            m3=m3v,
            hazard_class=HazardClass(clsv),
            collision=colv,
        )
        for t, sid, oid, dv, cv, srv, sav, m2v, m3v, clsv, colv in zip(
            ts,
            subject_ids,
            object_ids,
            d.tolist(),
            closing.tolist(),
            s_rel.tolist(),
            s_abs.tolist(),
            m2.tolist(),
            m3.tolist(),
            cls.tolist(),
            collision.tolist(),
        )
    ]


def warmup(backend: Optional[str] = None) -> str:
    """Trigger JIT compilation on a tiny input; returns the backend used."""
    resolved = resolve_backend(backend)
    if resolved in ("numpy", "numba"):
        z = np.zeros(1, dtype=np.float64)
        one = np.ones(1, dtype=np.float64)
        arrays = (z, z, one, z, z, z, one, z, z, z, z, z)
        if resolved == "numba":
            _compute_numba(*arrays, D_FLOOR, 10.0, 100.0)
        else:
            _compute_numpy(arrays, D_FLOOR, 10.0, 100.0)
    return resolved
