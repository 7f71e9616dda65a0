"""Scenario files, run orchestration and the command-line front end"""

from .config import LoadedScenario, ScenarioConfig, apply_override, load_config
from .outputs import RunStore
from .runner import ScenarioRunner, report, resolve_run_dir, simulate_coverage, sweep

__all__ = [
    "LoadedScenario",
    "RunStore",
    "ScenarioConfig",
    "ScenarioRunner",
    "apply_override",
    "load_config",
    "report",
    "resolve_run_dir",
    "simulate_coverage",
    "sweep",
]
