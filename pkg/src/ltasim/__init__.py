"""Closed-loop simulator for lighter-than-air micro-drones that seek a modulated light beacon."""

from .errors import (
    DegenerateGeometry,
    DegenerateVector,
    LtaSimError,
    NoSignal,
    NonFiniteState,
    ParseError,
    ValidationError,
)
from .platforms import beavis, gt_mab, preset
from .scenario import RunMetrics, ScenarioConfig, batch, bundled, from_dict, load_scenario, run
from .studies import bearing_error_sweep, mounting_stability_study

__version__ = "0.1.0"

__all__ = [
    "DegenerateGeometry", "DegenerateVector", "LtaSimError", "NoSignal", "NonFiniteState", "ParseError",
    "ValidationError", "beavis", "gt_mab", "preset", "RunMetrics", "ScenarioConfig", "batch", "bundled",
    "from_dict", "load_scenario", "run", "bearing_error_sweep", "mounting_stability_study",
]
