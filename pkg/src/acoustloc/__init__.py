"""Acoustic ranging and relative localization for commodity devices.

Phones play pseudo-noise pulses on a shared schedule and record each other;
counting samples between arrivals gives pairwise distances without clock
synchronization, and s-stress MDS turns the (noisy, possibly incomplete)
distance matrix into a relative map.
"""

__version__ = "0.1.0"

from .alignment import AlignmentResult, align_and_score
from .detect import (
    DetectionReport,
    Recording,
    ToaMatrix,
    binary_matched_filter,
    detect_peaks_iterative,
    detect_session,
    sign_filter,
)
from .edm import Edm, PointConfig, edm_from_points, is_edm, metric_checks
from .fusion import MeasurementSet, fuse, pair_stats
from .mds import (
    NotEdmError,
    SolverSettings,
    SStressProblem,
    UnderConstrainedError,
    classical_mds,
    coordinate_update,
    sstress_cost,
    sstress_gradient,
    sstress_solve,
    sstress_solve_multistart,
)
from .pulse import BinarySequence, PnPulse, gen_pn_sequence, session_pulses, shape_pulse
from .ranging import (
    DistanceMeasurement,
    SoundSpeedModel,
    etoa_distance,
    speed_of_sound,
    toa_to_distances,
)
from .scenario import (
    PRESETS,
    ConfigError,
    ScenarioConfig,
    ScenarioResult,
    compare_weighting,
    run_scenario,
)
from .schedule import Schedule, ScheduleConstraints, make_schedule, validate_schedule
from .sim import (
    ChannelModel,
    SessionPlan,
    SessionTruth,
    collisions,
    missed_pulses,
    plan_session,
    run_repeated,
    simulate_session,
    write_pcm,
)

__all__ = [
    "AlignmentResult",
    "BinarySequence",
    "ChannelModel",
    "ConfigError",
    "DetectionReport",
    "DistanceMeasurement",
    "Edm",
    "MeasurementSet",
    "NotEdmError",
    "PRESETS",
    "PnPulse",
    "PointConfig",
    "Recording",
    "ScenarioConfig",
    "ScenarioResult",
    "Schedule",
    "ScheduleConstraints",
    "SessionPlan",
    "SessionTruth",
    "SolverSettings",
    "SoundSpeedModel",
    "SStressProblem",
    "ToaMatrix",
    "UnderConstrainedError",
    "align_and_score",
    "binary_matched_filter",
    "classical_mds",
    "collisions",
    "compare_weighting",
    "coordinate_update",
    "detect_peaks_iterative",
    "detect_session",
    "edm_from_points",
    "etoa_distance",
    "fuse",
    "gen_pn_sequence",
    "is_edm",
    "make_schedule",
    "metric_checks",
    "missed_pulses",
    "pair_stats",
    "plan_session",
    "run_repeated",
    "run_scenario",
    "session_pulses",
    "shape_pulse",
    "sign_filter",
    "simulate_session",
    "speed_of_sound",
    "sstress_cost",
    "sstress_gradient",
    "sstress_solve",
    "sstress_solve_multistart",
    "toa_to_distances",
    "validate_schedule",
    "write_pcm",
]
