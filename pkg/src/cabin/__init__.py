"""In-cabin distribution: antenna arrays, SBR ray tracing and path-loss statistics"""

from .antenna import ArrayGeometry, SteeredGain, array_factor_gain, cpe_array, fixed_beam_gain, steer_toward, ue_array
from .geometry import BORESIGHTS, CabinGeometry, ReceiverNode, TransmitterNode, default_receivers, default_transmitters
from .placement import optimize_transmitter_placement
from .raytracer import (
    CabinRayTracer,
    CabinScenario,
    LinkLoss,
    PathLossMatrix,
    RayPath,
    fspl_db,
    image_path,
    image_paths,
    launch_rays,
    path_loss,
    score_paths,
    trace,
)
from .stats import CabinStats, TransmitterStats, aggregate_stats

__all__ = [
    "ArrayGeometry",
    "BORESIGHTS",
    "CabinGeometry",
    "CabinRayTracer",
    "CabinScenario",
    "CabinStats",
    "LinkLoss",
    "PathLossMatrix",
    "RayPath",
    "ReceiverNode",
    "SteeredGain",
    "TransmitterNode",
    "TransmitterStats",
    "aggregate_stats",
    "array_factor_gain",
    "cpe_array",
    "default_receivers",
    "default_transmitters",
    "fixed_beam_gain",
    "fspl_db",
    "image_path",
    "image_paths",
    "launch_rays",
    "optimize_transmitter_placement",
    "path_loss",
    "score_paths",
    "steer_toward",
    "trace",
]
