"""Satellite insertion, serving selection and coverage metrics"""

from .manager import (
    ConstellationManager,
    CoverageRun,
    Satellite,
    SatelliteStatus,
    density_policy,
    run_sequential_insertion,
)
from .search import CoverageState, ElementTemplate, InsertionPolicy, initial_satellite, next_satellite
from .timeline import (
    CoverageTimeline,
    HandoverEvent,
    build_timeline,
    coverage_percentage,
    extract_handovers,
    select_serving,
)

__all__ = [
    "ConstellationManager",
    "CoverageRun",
    "CoverageState",
    "CoverageTimeline",
    "ElementTemplate",
    "HandoverEvent",
    "InsertionPolicy",
    "Satellite",
    "SatelliteStatus",
    "build_timeline",
    "coverage_percentage",
    "density_policy",
    "extract_handovers",
    "initial_satellite",
    "next_satellite",
    "run_sequential_insertion",
    "select_serving",
]
