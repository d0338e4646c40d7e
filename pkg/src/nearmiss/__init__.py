"""Near-miss collision hazard scoring for vehicle trajectories.

Scores a subject vehicle against every traffic object, frame by frame,
with hazard measures built from separation distance and relative speed;
aggregates the scores into histograms and summaries; ships a TTC baseline
for comparison and a deterministic scenario generator used as the test
oracle.
"""

from .aggregate import (
    HazardHistogram,
    HistogramConfig,
    PairSeries,
    ScenarioSummary,
    build_histogram,
    frame_maxima,
    running_maxima,
    series_per_object,
    summarize,
)
from .core import (
    ConfigError,
    FrameSnapshot,
    NearMissError,
    ObjectKind,
    ObjectState,
    ParseError,
    Scenario,
    ValidationError,
    Vec2,
    Violation,
    validate_scenario,
)
from .generate import GeneratorSpec, generate
from .hazard import (
    D_FLOOR,
    DEFAULT_THRESHOLDS,
    HazardClass,
    HazardThresholds,
    PairSample,
    evaluate_frame,
    evaluate_pair,
    evaluate_scenario,
    measure_m2,
    measure_m3,
)
from .kinematics import (
    PairGeometry,
    pair_geometry,
    relative_speed_magnitude,
    separation_distance,
)
from .scenario_io import (
    parse_scenario,
    read_samples_csv,
    write_histogram_json,
    write_samples_csv,
    write_scenario,
    write_summary_json,
)
from .ttc import TtcSample, non_monotonicity_witness, ttc

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "D_FLOOR",
    "DEFAULT_THRESHOLDS",
    "FrameSnapshot",
    "GeneratorSpec",
    "HazardClass",
    "HazardHistogram",
    "HazardThresholds",
    "HistogramConfig",
    "NearMissError",
    "ObjectKind",
    "ObjectState",
    "PairGeometry",
    "PairSample",
    "PairSeries",
    "ParseError",
    "Scenario",
    "ScenarioSummary",
    "TtcSample",
    "ValidationError",
    "Vec2",
    "Violation",
    "build_histogram",
    "evaluate_frame",
    "evaluate_pair",
    "evaluate_scenario",
    "frame_maxima",
    "generate",
    "measure_m2",
    "measure_m3",
    "non_monotonicity_witness",
    "pair_geometry",
    "parse_scenario",
    "read_samples_csv",
    "relative_speed_magnitude",
    "running_maxima",
    "separation_distance",
    "series_per_object",
    "summarize",
    "ttc",
    "validate_scenario",
    "write_histogram_json",
    "write_samples_csv",
    "write_scenario",
    "write_summary_json",
]
