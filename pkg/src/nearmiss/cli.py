"""Command-line orchestration.

Subcommands:

* ``simulate``  generator spec -> scenario JSON-lines file
* ``compute``   scenario file -> sample CSV (+ optional summary JSON)
* ``hist``      sample CSV -> histogram JSON
* ``compare``   scenario -> hazard-vs-TTC table; ``--witness`` prints the
  built-in pair of encounters that TTC ranks opposite to the hazard measure
* ``plot``      histogram JSON or sample CSV -> deterministic SVG
* ``validate``  scenario file -> invariant violations

Exit codes: 0 success, 1 validation/parse/config error, 2 usage error.
Every output file is written atomically (temp file + rename). SVG output
is plain generated markup so identical inputs give identical bytes.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

from .aggregate import (
    HazardHistogram,
    HistogramConfig,
    PairSeries,
    build_histogram,
    series_per_object,
    summarize,
)
from .core import NearMissError, ParseError, Scenario, ValidationError, validate_scenario
from .generate import GeneratorSpec, generate
from .hazard import DEFAULT_THRESHOLDS, HazardThresholds, evaluate_scenario
from .kinematics import pair_geometry, relative_speed_magnitude
from .scenario_io import (
    AppConfig,
    DEFAULT_CONFIG_TOML,
    atomic_write_bytes,
    format_float,
    load_config,
    parse_scenario,
    read_samples_csv,
    write_histogram_json,
    write_samples_csv,
    write_scenario,
    write_summary_json,
)
from .ttc import non_monotonicity_witness, ttc

# ---------------------------------------------------------------------------
# SVG rendering (dependency-free, byte-deterministic)
# ---------------------------------------------------------------------------

_SVG_W, _SVG_H = 800, 400
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 60, 20, 20, 50
_PALETTE = ("#009061", "#26aef8", "#ef4d4e", "#fb9933", "#6b59c1", "#f3c332", "#f27799")


def _f(value: float) -> str:
    return f"{value:.2f}"


def _svg_open(lines: list[str]) -> None:
    lines.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">'
    )
    lines.append(f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>')


def _svg_axes(lines: list[str]) -> None:
    x0, y0 = _MARGIN_L, _SVG_H - _MARGIN_B
    x1, y1 = _SVG_W - _MARGIN_R, _MARGIN_T
    lines.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black" stroke-width="1"/>'
    )
    lines.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black" stroke-width="1"/>'
    )


def plot_histogram_svg(hist: HazardHistogram) -> bytes:
    """Bar chart on a log-x axis; one bar per nonempty bin."""
    edges = hist.bin_edges
    lines: list[str] = []
    _svg_open(lines)
    _svg_axes(lines)

    lo_exp = math.log10(edges[0])
    hi_exp = math.log10(edges[-1])
    span_x = _SVG_W - _MARGIN_L - _MARGIN_R
    span_y = _SVG_H - _MARGIN_T - _MARGIN_B

    def x_at(value: float) -> float:
        return _MARGIN_L + (math.log10(value) - lo_exp) / (hi_exp - lo_exp) * span_x

    max_count = max(hist.counts, default=0)
    if max_count > 0:
        for i, count in enumerate(hist.counts):
            if count <= 0:
                continue
            x = x_at(edges[i])
            w = x_at(edges[i + 1]) - x
            h = count / max_count * span_y
            y = _SVG_H - _MARGIN_B - h
            lines.append(
                f'<rect class="bar" x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" '
                f'height="{_f(h)}" fill="#4c77eb" stroke="white" stroke-width="0.5"/>'
            )

    decade = math.ceil(lo_exp - 1e-9)
    while decade <= hi_exp + 1e-9:
        value = 10.0 ** decade
        x = x_at(value)
        lines.append(
            f'<line x1="{_f(x)}" y1="{_SVG_H - _MARGIN_B}" x2="{_f(x)}" '
            f'y2="{_SVG_H - _MARGIN_B + 5}" stroke="black" stroke-width="1"/>'
        )
        lines.append(
            f'<text x="{_f(x)}" y="{_SVG_H - _MARGIN_B + 18}" font-size="11" '
            f'text-anchor="middle">{format_float(value)}</text>'
        )
        decade += 1

    lines.append(
        f'<text x="{_MARGIN_L - 8}" y="{_SVG_H - _MARGIN_B}" font-size="11" '
        f'text-anchor="end">0</text>'
    )
    if max_count > 0:
        lines.append(
            f'<text x="{_MARGIN_L - 8}" y="{_MARGIN_T + 4}" font-size="11" '
            f'text-anchor="end">{max_count}</text>'
        )
    lines.append(
        f'<text x="{_SVG_W // 2}" y="{_SVG_H - 8}" font-size="12" '
        f'text-anchor="middle">hazard value ({hist.config.measure}, m/s^2)</text>'
    )
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def plot_series_svg(series: Sequence[PairSeries], measure: str = "m3") -> bytes:
    """Per-object hazard value over time, one polyline per object."""
    value_index = 1 if measure == "m2" else 2
    lines: list[str] = []
    _svg_open(lines)
    _svg_axes(lines)

    points = [(p[0], p[value_index]) for s in series for p in s.points]
    if points:
        t_lo = min(p[0] for p in points)
        t_hi = max(p[0] for p in points)
        v_hi = max(p[1] for p in points)
        t_span = (t_hi - t_lo) or 1.0
        v_span = v_hi or 1.0
        span_x = _SVG_W - _MARGIN_L - _MARGIN_R
        span_y = _SVG_H - _MARGIN_T - _MARGIN_B

        for idx, s in enumerate(series):
            color = _PALETTE[idx % len(_PALETTE)]
            coords = " ".join(
                f"{_f(_MARGIN_L + (p[0] - t_lo) / t_span * span_x)},"
                f"{_f(_SVG_H - _MARGIN_B - p[value_index] / v_span * span_y)}"
                for p in s.points
            )
            lines.append(
                f'<polyline class="series" data-object="{s.object_id}" fill="none" '
                f'stroke="{color}" stroke-width="1.5" points="{coords}"/>'
            )
        lines.append(
            f'<text x="{_MARGIN_L - 8}" y="{_MARGIN_T + 4}" font-size="11" '
            f'text-anchor="end">{format_float(v_hi)}</text>'
        )
    lines.append(
        f'<text x="{_SVG_W // 2}" y="{_SVG_H - 8}" font-size="12" '
        f'text-anchor="middle">{measure} over time (m/s^2)</text>'
    )
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def _load_app_config(args) -> Optional[AppConfig]:
    path = getattr(args, "config", None) or getattr(args, "thresholds_file", None)
    return load_config(path) if path else None


def _resolve_thresholds(args, config: Optional[AppConfig]) -> HazardThresholds:
    thresholds = config.thresholds if config else DEFAULT_THRESHOLDS
    safe_max = args.safe_max if args.safe_max is not None else thresholds.safe_max
    hazardous_max = (
        args.hazardous_max if args.hazardous_max is not None else thresholds.hazardous_max
    )
    return HazardThresholds(safe_max=safe_max, hazardous_max=hazardous_max)


def _parse_scenario_arg(args) -> Scenario:
    return parse_scenario(
        _read_bytes(args.infile),
        backfill_velocities=getattr(args, "backfill_velocities", False),
        default_name=Path(args.infile).stem,
    )


def _cmd_validate(args) -> int:
    try:
        scenario = _parse_scenario_arg(args)
    except ValidationError as exc:
        for violation in exc.violations:
            print(violation, file=sys.stderr)
        return 1
    print(f"OK: {len(scenario.frames)} frame(s), no violations")
    return 0


def _cmd_simulate(args) -> int:
    config = _load_app_config(args)
    base = asdict(config.generator) if config and config.generator else {}
    for key in (
        "template",
        "frame_rate",
        "duration",
        "seed",
        "jitter",
        "speed",
        "offset",
        "cross_speed",
        "miss",
        "lead_speed",
        "gap",
    ):
        value = getattr(args, key)
        if value is not None:
            base[key] = value
    if "template" not in base:
        raise NearMissError("simulate needs --template (or a [generator] config table)")
    spec = GeneratorSpec(**base)
    scenario = generate(spec)
    atomic_write_bytes(args.out, write_scenario(scenario))
    print(f"wrote {args.out}: {len(scenario.frames)} frame(s), template {spec.template}")
    return 0


def _cmd_compute(args) -> int:
    config = _load_app_config(args)
    thresholds = _resolve_thresholds(args, config)
    scenario = _parse_scenario_arg(args)
    samples = evaluate_scenario(scenario, thresholds, backend=args.backend)
    atomic_write_bytes(args.out, write_samples_csv(samples))
    outputs = [args.out]
    if args.summary:
        atomic_write_bytes(args.summary, write_summary_json(summarize(samples)))
        outputs.append(args.summary)
    print(f"wrote {', '.join(outputs)}: {len(samples)} sample(s)")
    return 0


def _resolve_histogram_config(args, config: Optional[AppConfig]) -> HistogramConfig:
    base = config.histogram if config else HistogramConfig()
    return HistogramConfig(
        lo=args.lo if args.lo is not None else base.lo,
        hi=args.hi if args.hi is not None else base.hi,
        bins_per_decade=(
            args.bins_per_decade if args.bins_per_decade is not None else base.bins_per_decade
        ),
        measure=args.measure if args.measure is not None else base.measure,
    )


def _cmd_hist(args) -> int:
    config = _load_app_config(args)
    hist_config = _resolve_histogram_config(args, config)
    samples = read_samples_csv(_read_bytes(args.infile))
    hist = build_histogram(samples, hist_config)
    atomic_write_bytes(args.out, write_histogram_json(hist))
    print(f"wrote {args.out}: {hist.total_samples} hazard-bearing sample(s) binned")
    return 0


def _witness_table() -> str:
    a, b, report = non_monotonicity_witness()
    rows = [
        "encounter  d_sep_m  closing_m_per_s  ttc_s  m2_m_per_s2",
    ]
    for enc in (a, b):
        rows.append(
            f"{enc.label:<9}  {format_float(enc.d_sep):>7}  "
            f"{format_float(enc.closing_speed):>15}  {format_float(enc.ttc):>5}  "
            f"{format_float(enc.m2):>11}"
        )
    rows.append(
        f"TTC ranks {b.label} as more urgent ({format_float(report.ttc_b)} s < "
        f"{format_float(report.ttc_a)} s) while m2 ranks {a.label} as more hazardous "
        f"({format_float(report.m2_a)} > {format_float(report.m2_b)} m/s^2)."
    )
    return "\n".join(rows) + "\n"


def _compare_table(scenario: Scenario, thresholds: HazardThresholds) -> str:
    from .hazard import evaluate_pair

    rows = ["t,object_id,d_sep,closing_speed,m2,m3,ttc"]
    for frame in scenario.frames:
        for obj in frame.objects:
            g = pair_geometry(frame.subject, obj)
            sample = evaluate_pair(frame.subject, obj, frame.t, thresholds)
            t_val = ttc(g)
            rows.append(
                ",".join(
                    [
                        format_float(frame.t),
                        obj.id,
                        format_float(sample.d_sep),
                        format_float(sample.closing_speed),
                        format_float(sample.m2),
                        format_float(sample.m3),
                        "" if t_val is None else format_float(t_val),
                    ]
                )
            )
    return "\n".join(rows) + "\n"


def _cmd_compare(args) -> int:
    if args.witness:
        text = _witness_table()
    else:
        if not args.infile:
            raise NearMissError("compare needs --in SCENARIO or --witness")
        config = _load_app_config(args)
        thresholds = _resolve_thresholds(args, config)
        text = _compare_table(_parse_scenario_arg(args), thresholds)
    if args.out:
        atomic_write_bytes(args.out, text.encode("utf-8"))
    else:
        print(text, end="")
    return 0


def _cmd_plot(args) -> int:
    if bool(args.hist) == bool(args.series):
        raise NearMissError("plot needs exactly one of --hist HIST.json or --series SAMPLES.csv")
    if args.hist:
        from .scenario_io import parse_histogram_json

        svg = plot_histogram_svg(parse_histogram_json(_read_bytes(args.hist)))
    else:
        samples = read_samples_csv(_read_bytes(args.series))
        svg = plot_series_svg(series_per_object(samples), measure=args.measure or "m3")
    atomic_write_bytes(args.out, svg)
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_config_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="TOML config file")
    sub.add_argument(
        "--thresholds",
        dest="thresholds_file",
        help="TOML config file (alias for --config, thresholds emphasis)",
    )
    sub.add_argument("--safe-max", type=float, dest="safe_max", default=None)
    sub.add_argument("--hazardous-max", type=float, dest="hazardous_max", default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nearmiss",
        description="Trajectory near-miss hazard scoring, aggregation, and simulation.",
    )
    parser.add_argument(
        "--print-config",
        action="store_true",
        help="print the default configuration as TOML and exit",
    )
    commands = parser.add_subparsers(dest="command")

    sub = commands.add_parser("validate", help="check a scenario file's invariants")
    sub.add_argument("--in", dest="infile", required=True)
    sub.add_argument("--backfill-velocities", action="store_true")
    sub.set_defaults(func=_cmd_validate)

    sub = commands.add_parser("simulate", help="generate a synthetic scenario file")
    sub.add_argument("--template")
    sub.add_argument("--out", required=True)
    sub.add_argument("--config", help="TOML config file with a [generator] table")
    sub.add_argument("--frame-rate", type=float, dest="frame_rate")
    sub.add_argument("--duration", type=float)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--jitter", type=float)
    sub.add_argument("--speed", type=float)
    sub.add_argument("--offset", type=float)
    sub.add_argument("--cross-speed", type=float, dest="cross_speed")
    sub.add_argument("--miss", type=float)
    sub.add_argument("--lead-speed", type=float, dest="lead_speed")
    sub.add_argument("--gap", type=float)
    sub.set_defaults(func=_cmd_simulate, thresholds_file=None)

    sub = commands.add_parser("compute", help="score a scenario into a sample CSV")
    sub.add_argument("--in", dest="infile", required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--summary", help="also write a summary JSON here")
    sub.add_argument("--backfill-velocities", action="store_true")
    sub.add_argument("--backend", choices=("python", "numpy", "numba"))
    _add_config_flags(sub)
    sub.set_defaults(func=_cmd_compute)

    sub = commands.add_parser("hist", help="bin a sample CSV into a histogram JSON")
    sub.add_argument("--in", dest="infile", required=True)
    sub.add_argument("--out", required=True)
    sub.add_argument("--config", help="TOML config file")
    sub.add_argument("--measure", choices=("m2", "m3"))
    sub.add_argument("--lo", type=float)
    sub.add_argument("--hi", type=float)
    sub.add_argument("--bins-per-decade", type=int, dest="bins_per_decade")
    sub.set_defaults(func=_cmd_hist, thresholds_file=None)

    sub = commands.add_parser("compare", help="hazard measure vs TTC, per sample")
    sub.add_argument("--in", dest="infile")
    sub.add_argument("--witness", action="store_true", help="print the built-in ranking-inversion pair")
    sub.add_argument("--out")
    sub.add_argument("--backfill-velocities", action="store_true")
    _add_config_flags(sub)
    sub.set_defaults(func=_cmd_compare)

    sub = commands.add_parser("plot", help="render a histogram or series SVG")
    sub.add_argument("--hist", help="histogram JSON input")
    sub.add_argument("--series", help="sample CSV input")
    sub.add_argument("--measure", choices=("m2", "m3"))
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=_cmd_plot)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.print_config:
        print(DEFAULT_CONFIG_TOML, end="")
        return 0
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        print("error: a command is required (or --print-config)", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ValidationError as exc:
        for violation in exc.violations:
            print(f"error: {violation}", file=sys.stderr)
        return 1
    except NearMissError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
