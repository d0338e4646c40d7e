"""File formats: scenario JSON-lines, sample CSV, histogram/summary JSON, config.

All formats are artifact-defined and documented in the README:

* Scenario files are UTF-8 JSON-lines: an optional first header object
  ``{"name": ..., "metadata": {...}}`` followed by one frame object per
  line. Floats are written with ``repr`` so a write/parse round trip is
  exact.
* Sample tables are CSV with floats at 7 significant digits in plain
  decimal notation (never scientific), which keeps every value within
  1e-6 relative of the original when read back.
* Histograms and summaries are single JSON documents that round-trip
  exactly.
* Configuration is TOML with ``[thresholds]``, ``[histogram]`` and
  ``[generator]`` tables; unknown keys are ignored so files written for
  future revisions (e.g. carrying grip or maneuverability estimates)
  still load.

Velocity backfill is opt-in: when a file omits vx/vy and the caller
enables it, velocities are finite-differenced from positions (central
where possible, one-sided at the ends of each object's visibility span)
and the scenario is marked ``velocities_backfilled`` in its metadata.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Any, Optional, Union

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .aggregate import HazardHistogram, HistogramConfig, ScenarioSummary
from .core import (
    ConfigError,
    FrameSnapshot,
    ObjectKind,
    ObjectState,
    ParseError,
    RULE_NON_FINITE,
    Scenario,
    ValidationError,
    Vec2,
    Violation,
    validate_scenario,
)
from .generate import GeneratorSpec
from .hazard import HazardClass, HazardThresholds, PairSample

BACKFILL_METADATA_KEY = "velocities_backfilled"

CSV_HEADER = [
    "t",
    "subject_id",
    "object_id",
    "d_sep",
    "closing_speed",
    "s_rel",
    "s_abs",
    "m2",
    "m3",
    "class",
    "collision",
]


def format_float(x: float, sig: int = 7) -> str:
    """Plain decimal rendering at ``sig`` significant digits, no exponent."""
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot format non-finite value {x}")
    s = f"{x:.{sig}g}"
    if "e" in s or "E" in s:
        s = format(Decimal(s), "f")
    return s


def atomic_write_bytes(path: Union[str, Path], data: bytes) -> None:
    """Write via a sibling temp file and rename, so readers never see partials."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


# ---------------------------------------------------------------------------
# Scenario JSON-lines
# ---------------------------------------------------------------------------


def _state_to_wire(state: ObjectState) -> dict[str, Any]:
    d: dict[str, Any] = {
        "id": state.id,
        "kind": state.kind.value,
        "x": state.position.x,
        "y": state.position.y,
        "vx": state.velocity.x,
        "vy": state.velocity.y,
    }
    if state.half_extent is not None:
        d["hx"] = state.half_extent.x
        d["hy"] = state.half_extent.y
    return d


def write_scenario(scenario: Scenario) -> bytes:
    """Serialize to JSON-lines: header line, then one frame per line."""
    out = io.StringIO()
    header = {"name": scenario.name, "metadata": dict(scenario.metadata)}
    out.write(json.dumps(header, separators=(",", ":")))
    out.write("\n")
    for frame in scenario.frames:
        record = {
            "t": frame.t,
            "subject": _state_to_wire(frame.subject),
            "objects": [_state_to_wire(obj) for obj in frame.objects],
        }
        out.write(json.dumps(record, separators=(",", ":")))
        out.write("\n")
    return out.getvalue().encode("utf-8")


@dataclass
class _RawState:
    """One wire object before Vec2 construction (may lack velocities)."""

    id: str
    kind: ObjectKind
    x: float
    y: float
    vx: Optional[float]
    vy: Optional[float]
    hx: Optional[float]
    hy: Optional[float]
    line: int
    occurrence: int = -1


def _require(record: dict, key: str, line: int) -> Any:
    if key not in record:
        raise ParseError(f"missing required field {key!r}", line)
    return record[key]


def _number(value: Any, key: str, line: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"field {key!r} must be a number, got {value!r}", line)
    return float(value)


def _parse_raw_state(
    record: Any, line: int, allow_missing_velocity: bool
) -> _RawState:
    if not isinstance(record, dict):
        raise ParseError(f"object state must be a JSON object, got {record!r}", line)
    obj_id = _require(record, "id", line)
    if not isinstance(obj_id, str):
        raise ParseError(f"field 'id' must be a string, got {obj_id!r}", line)
    kind = ObjectKind.parse(str(record.get("kind", "other")))
    x = _number(_require(record, "x", line), "x", line)
    y = _number(_require(record, "y", line), "y", line)

    vx: Optional[float]
    vy: Optional[float]
    if "vx" in record or "vy" in record or not allow_missing_velocity:
        vx = _number(_require(record, "vx", line), "vx", line)
        vy = _number(_require(record, "vy", line), "vy", line)
    else:
        vx = None
        vy = None

    hx = _number(record["hx"], "hx", line) if "hx" in record else None
    hy = _number(record["hy"], "hy", line) if "hy" in record else None
    if (hx is None) != (hy is None):
        raise ParseError("half extents need both 'hx' and 'hy'", line)
    return _RawState(obj_id, kind, x, y, vx, vy, hx, hy, line)


def _finite_or_zero(
    value: float, frame_idx: int, obj_id: str, violations: list[Violation]
) -> float:
    """Replace non-finite wire values with 0.0 and record the violation.

    Vec2 refuses NaN/Inf outright; substituting keeps the parse going so
    a single report covers every broken value in the file.
    """
    if math.isfinite(value):
        return value
    violations.append(
        Violation(RULE_NON_FINITE, frame_idx, obj_id, f"non-finite value {value}")
    )
    return 0.0


def _build_state(
    raw: _RawState, frame_idx: int, violations: list[Violation]
) -> ObjectState:
    x = _finite_or_zero(raw.x, frame_idx, raw.id, violations)
    y = _finite_or_zero(raw.y, frame_idx, raw.id, violations)
    vx = _finite_or_zero(raw.vx if raw.vx is not None else 0.0, frame_idx, raw.id, violations)
    vy = _finite_or_zero(raw.vy if raw.vy is not None else 0.0, frame_idx, raw.id, violations)
    half_extent = None
    if raw.hx is not None and raw.hy is not None:
        hx = _finite_or_zero(raw.hx, frame_idx, raw.id, violations)
        hy = _finite_or_zero(raw.hy, frame_idx, raw.id, violations)
        half_extent = Vec2(hx, hy)
    return ObjectState(
        id=raw.id,
        kind=raw.kind,
        position=Vec2(x, y),
        velocity=Vec2(vx, vy),
        half_extent=half_extent,
    )


def _backfill_timeline(
    points: list[tuple[int, float, float, float]],
) -> dict[int, tuple[float, float]]:
    """Finite-difference velocities for one object's (occurrence, t, x, y) run."""
    n = len(points)
    velocities: dict[int, tuple[float, float]] = {}
    for i, (occ, _, _, _) in enumerate(points):
        if n == 1:
            velocities[occ] = (0.0, 0.0)
            continue
        lo = max(i - 1, 0)
        hi = min(i + 1, n - 1)
        dt = points[hi][1] - points[lo][1]
        if dt <= 0.0:
            velocities[occ] = (0.0, 0.0)
            continue
        vx = (points[hi][2] - points[lo][2]) / dt
        vy = (points[hi][3] - points[lo][3]) / dt
        velocities[occ] = (vx, vy)
    return velocities


def parse_scenario(
    data: Union[bytes, str],
    *,
    backfill_velocities: bool = False,
    default_name: str = "",
) -> Scenario:
    """Parse JSON-lines into a validated Scenario.

    Raises ParseError (with a 1-based line number) for structural problems
    and ValidationError listing every broken invariant otherwise. The
    optional header line is recognized by the absence of a "t" field.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not valid UTF-8: {exc}") from exc
    else:
        text = data

    name = default_name
    metadata: dict[str, str] = {}
    raw_frames: list[tuple[int, float, _RawState, list[_RawState]]] = []
    header_allowed = True

    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON ({exc.msg})", line_no) from exc
        if not isinstance(record, dict):
            raise ParseError(f"expected a JSON object, got {record!r}", line_no)

        if "t" not in record:
            if header_allowed and set(record) <= {"name", "metadata"}:
                header_allowed = False
                if "name" in record:
                    if not isinstance(record["name"], str):
                        raise ParseError("header 'name' must be a string", line_no)
                    name = record["name"]
                meta = record.get("metadata", {})
                if not isinstance(meta, dict):
                    raise ParseError("header 'metadata' must be an object", line_no)
                metadata = {str(k): str(v) for k, v in meta.items()}
                continue
            raise ParseError("frame record is missing field 't'", line_no)
        header_allowed = False

        t = _number(record["t"], "t", line_no)
        subject = _parse_raw_state(
            _require(record, "subject", line_no), line_no, backfill_velocities
        )
        objects_field = _require(record, "objects", line_no)
        if not isinstance(objects_field, list):
            raise ParseError("field 'objects' must be a list", line_no)
        objects = [
            _parse_raw_state(obj, line_no, backfill_velocities)
            for obj in objects_field
        ]
        raw_frames.append((line_no, t, subject, objects))

    missing_velocity = any(
        raw.vx is None
        for _, _, subject, objects in raw_frames
        for raw in [subject, *objects]
    )
    if missing_velocity:
        timelines: dict[str, list[tuple[int, float, float, float]]] = {}
        counter = 0
        for _, t, subject, objects in raw_frames:
            for raw in [subject, *objects]:
                raw.occurrence = counter
                timelines.setdefault(raw.id, []).append((counter, t, raw.x, raw.y))
                counter += 1
        filled: dict[int, tuple[float, float]] = {}
        for points in timelines.values():
            filled.update(_backfill_timeline(points))
        for _, t, subject, objects in raw_frames:
            for raw in [subject, *objects]:
                if raw.vx is None:
                    raw.vx, raw.vy = filled[raw.occurrence]
        metadata = dict(metadata)
        metadata[BACKFILL_METADATA_KEY] = "true"

    violations: list[Violation] = []
    frames = []
    for frame_idx, (_, t, subject, objects) in enumerate(raw_frames):
        frames.append(
            FrameSnapshot(
                t=t,
                subject=_build_state(subject, frame_idx, violations),
                objects=[_build_state(obj, frame_idx, violations) for obj in objects],
            )
        )

    scenario = Scenario(name=name, frames=frames, metadata=metadata)
    violations.extend(validate_scenario(scenario))
    if violations:
        raise ValidationError(violations)
    return scenario


# ---------------------------------------------------------------------------
# Samples CSV
# ---------------------------------------------------------------------------


def write_samples_csv(samples: list[PairSample]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for s in samples:
        writer.writerow(
            [
                format_float(s.t),
                s.subject_id,
                s.object_id,
                format_float(s.d_sep),
                format_float(s.closing_speed),
                format_float(s.s_rel),
                format_float(s.s_abs),
                format_float(s.m2),
                format_float(s.m3),
                s.hazard_class.label,
                "true" if s.collision else "false",
            ]
        )
    return out.getvalue().encode("utf-8")


def read_samples_csv(data: Union[bytes, str]) -> list[PairSample]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV: missing header") from None
    if header != CSV_HEADER:
        raise ParseError(f"unexpected CSV header {header!r}", line=1)

    samples = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise ParseError(
                f"expected {len(CSV_HEADER)} fields, got {len(row)}", line_no
            )
        try:
            samples.append(
                PairSample(
                    t=float(row[0]),
                    subject_id=row[1],
                    object_id=row[2],
                    d_sep=float(row[3]),
                    closing_speed=float(row[4]),
                    s_rel=float(row[5]),
                    s_abs=float(row[6]),
                    m2=float(row[7]),
                    m3=float(row[8]),
                    hazard_class=HazardClass.from_label(row[9]),
                    collision={"true": True, "false": False}[row[10]],
                )
            )
        except (ValueError, KeyError) as exc:
            raise ParseError(f"bad sample row: {exc}", line_no) from exc
    return samples


# ---------------------------------------------------------------------------
# Histogram and summary JSON
# ---------------------------------------------------------------------------


def write_histogram_json(hist: HazardHistogram) -> bytes:
    doc = {
        "measure": hist.config.measure,
        "lo": hist.config.lo,
        "hi": hist.config.hi,
        "bins_per_decade": hist.config.bins_per_decade,
        "edges": hist.bin_edges,
        "counts": hist.counts,
        "underflow": hist.underflow,
        "overflow": hist.overflow,
        "total_samples": hist.total_samples,
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def parse_histogram_json(data: Union[bytes, str]) -> HazardHistogram:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON ({exc.msg})") from exc
    try:
        config = HistogramConfig(
            lo=float(doc["lo"]),
            hi=float(doc["hi"]),
            bins_per_decade=int(doc["bins_per_decade"]),
            measure=str(doc["measure"]),
        )
        hist = HazardHistogram(
            config=config,
            counts=[int(c) for c in doc["counts"]],
            underflow=int(doc["underflow"]),
            overflow=int(doc["overflow"]),
            total_samples=int(doc["total_samples"]),
        )
    except KeyError as exc:
        raise ParseError(f"histogram document is missing field {exc}") from exc
    if list(doc.get("edges", hist.bin_edges)) != hist.bin_edges:
        raise ParseError("histogram edges do not match the declared bin config")
    return hist


def write_summary_json(summary: ScenarioSummary) -> bytes:
    doc = {
        "max_m3": summary.max_m3,
        "max_m3_t": summary.max_m3_t,
        "max_m3_object_id": summary.max_m3_object_id,
        "class_counts": summary.class_counts,
        "converging_fraction": summary.converging_fraction,
        "min_d_sep": summary.min_d_sep,
        "collision_count": summary.collision_count,
        "total_samples": summary.total_samples,
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def parse_summary_json(data: Union[bytes, str]) -> ScenarioSummary:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON ({exc.msg})") from exc
    try:
        return ScenarioSummary(
            max_m3=float(doc["max_m3"]),
            max_m3_t=None if doc["max_m3_t"] is None else float(doc["max_m3_t"]),
            max_m3_object_id=doc["max_m3_object_id"],
            class_counts={str(k): int(v) for k, v in doc["class_counts"].items()},
            converging_fraction=float(doc["converging_fraction"]),
            min_d_sep=None if doc["min_d_sep"] is None else float(doc["min_d_sep"]),
            collision_count=int(doc["collision_count"]),
            total_samples=int(doc["total_samples"]),
        )
    except KeyError as exc:
        raise ParseError(f"summary document is missing field {exc}") from exc


# ---------------------------------------------------------------------------
# TOML configuration
# ---------------------------------------------------------------------------

DEFAULT_CONFIG_TOML = """\
# Hazard engine configuration. Every key is optional; these are the defaults.

[thresholds]
safe_max = 10.0        # m/s^2: values up to this classify Safe
hazardous_max = 100.0  # m/s^2: values up to this classify Hazardous, above Unsafe
# Reserved for forward compatibility (parsed, currently unused):
# grip = 1.0
# min_turn_radius = 5.0
# lateral_accel = 3.0

[histogram]
lo = 0.01              # m/s^2: lower edge of the binned range
hi = 10000.0           # m/s^2: upper edge (values >= hi count as overflow)
bins_per_decade = 5
measure = "m3"         # "m3" (default) or "m2"

[generator]
template = "pass_by"   # pass_by | car_following | intersection_crossing | diverging_control
frame_rate = 20.0      # Hz
duration = 12.0        # seconds
seed = 0
jitter = 0.0           # m: uniform random initial-position offset per object
speed = 30.0           # m/s: subject speed (all templates)
offset = 1.0           # m: pass_by lateral clearance
# cross_speed = 10.0   # m/s: intersection_crossing crosser speed
# miss = 2.0           # m: intersection_crossing timing gap
# lead_speed = 17.0    # m/s: car_following lead speed
# gap = 50.0           # m: car_following initial gap
"""


@dataclass(frozen=True)
class AppConfig:
    """Everything a CLI run can take from a config file."""

    thresholds: HazardThresholds
    histogram: HistogramConfig
    generator: Optional[GeneratorSpec] = None


def _config_number(table: dict, key: str, section: str) -> Optional[float]:
    if key not in table:
        return None
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] {key} must be a number, got {value!r}")
    return float(value)


def _number_or(table: dict, key: str, section: str, default: float) -> float:
    value = _config_number(table, key, section)
    return default if value is None else value


def load_config_text(text: str) -> AppConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc

    thresholds_table = doc.get("thresholds", {})
    if not isinstance(thresholds_table, dict):
        raise ConfigError("[thresholds] must be a table")
    defaults = HazardThresholds()
    thresholds = HazardThresholds(
        safe_max=_number_or(thresholds_table, "safe_max", "thresholds", defaults.safe_max),
        hazardous_max=_number_or(
            thresholds_table, "hazardous_max", "thresholds", defaults.hazardous_max
        ),
    )

    hist_table = doc.get("histogram", {})
    if not isinstance(hist_table, dict):
        raise ConfigError("[histogram] must be a table")
    measure = hist_table.get("measure", "m3")
    if not isinstance(measure, str):
        raise ConfigError(f"[histogram] measure must be a string, got {measure!r}")
    bpd = hist_table.get("bins_per_decade", 5)
    if isinstance(bpd, bool) or not isinstance(bpd, int):
        raise ConfigError(f"[histogram] bins_per_decade must be an integer, got {bpd!r}")
    hist_defaults = HistogramConfig()
    histogram = HistogramConfig(
        lo=_number_or(hist_table, "lo", "histogram", hist_defaults.lo),
        hi=_number_or(hist_table, "hi", "histogram", hist_defaults.hi),
        bins_per_decade=bpd,
        measure=measure,
    )

    generator = None
    if "generator" in doc:
        gen_table = doc["generator"]
        if not isinstance(gen_table, dict):
            raise ConfigError("[generator] must be a table")
        if "template" not in gen_table:
            raise ConfigError("[generator] needs a 'template' key")
        template = gen_table["template"]
        if not isinstance(template, str):
            raise ConfigError(f"[generator] template must be a string, got {template!r}")
        seed = gen_table.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError(f"[generator] seed must be an integer, got {seed!r}")
        kwargs: dict[str, Any] = {"template": template, "seed": seed}
        for key in ("frame_rate", "duration", "jitter"):
            value = _config_number(gen_table, key, "generator")
            if value is not None:
                kwargs[key] = value
        for key in ("speed", "offset", "cross_speed", "miss", "lead_speed", "gap"):
            value = _config_number(gen_table, key, "generator")
            if value is not None:
                kwargs[key] = value
        generator = GeneratorSpec(**kwargs)

    return AppConfig(thresholds=thresholds, histogram=histogram, generator=generator)


def load_config(path: Union[str, Path]) -> AppConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return load_config_text(text)
