"""Aircraft-to-satellite link geometry

Elevation, slant range, nadir-cone membership and access intervals. A link
is usable when the satellite clears the elevation mask, the aircraft lies
inside the satellite's nadir-pointing beam, and the line of sight misses the
Earth sphere.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.errors import ValidationError
from src.flight import AircraftState, FlightPath
from src.orbital.elements import R_EARTH, EciState, KeplerianElements, propagate_many
from src.orbital.frames import eci_to_ecef, eci_to_ecef_many

_TIME_TOLERANCE_S = 1e-6


@dataclass(frozen=True)
class VisibilityMask:
    """Elevation mask and satellite beam cone"""

    min_elevation_deg: float = 10.0
    beam_half_angle_deg: float = 60.0

    def __post_init__(self):
        if not 0.0 <= self.min_elevation_deg < 90.0:
            raise ValidationError(f"min elevation {self.min_elevation_deg} must lie in [0, 90)",
                                  key="min_elevation_deg")
        if not 0.0 < self.beam_half_angle_deg <= 90.0:
            raise ValidationError(f"beam half-angle {self.beam_half_angle_deg} must lie in (0, 90]",
                                  key="beam_half_angle_deg")


@dataclass(frozen=True)
class LinkSample:
    """Geometry of one aircraft-satellite pair at one time"""

    t_s: float
    sat_id: int
    elevation_deg: float
    slant_range_m: float
    off_nadir_deg: float
    visible: bool


def elevation_angle(observer_ecef, sat_ecef) -> float:
    """Elevation of the satellite above the observer's local horizon, degrees"""
    observer = np.asarray(observer_ecef, dtype=float)
    if not np.linalg.norm(observer) > 0:
        raise ValidationError("observer position must be non-zero")
    return float(_elevation(observer[np.newaxis, :], np.asarray(sat_ecef, dtype=float)[np.newaxis, :])[0])


def _elevation(observer: np.ndarray, satellite: np.ndarray) -> np.ndarray:
    line_of_sight = satellite - observer
    up = observer / np.linalg.norm(observer, axis=-1, keepdims=True)
    distance = np.linalg.norm(line_of_sight, axis=-1)
    sine = np.einsum("ij,ij->i", up, line_of_sight) / distance
    return np.degrees(np.arcsin(np.clip(sine, -1.0, 1.0)))


def _off_nadir(observer: np.ndarray, satellite: np.ndarray) -> np.ndarray:
    to_observer = observer - satellite
    nadir = -satellite / np.linalg.norm(satellite, axis=-1, keepdims=True)
    cosine = np.einsum("ij,ij->i", nadir, to_observer) / np.linalg.norm(to_observer, axis=-1)
    return np.degrees(np.arccos(np.clip(cosine, -1.0, 1.0)))


def _clears_earth(observer: np.ndarray, satellite: np.ndarray) -> np.ndarray:
    segment = satellite - observer
    along = -np.einsum("ij,ij->i", observer, segment) / np.einsum("ij,ij->i", segment, segment)
    along = np.clip(along, 0.0, 1.0)
    closest = observer + along[:, np.newaxis] * segment
    return np.linalg.norm(closest, axis=-1) >= R_EARTH


def visibility_series(
    aircraft_ecef: np.ndarray,
    satellite_ecef: np.ndarray,
    mask: VisibilityMask,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized link geometry over paired position arrays (N, 3)

    Returns:
        Tuple of (visible flags, elevation degrees, slant range meters)
    """
    elevation = _elevation(aircraft_ecef, satellite_ecef)
    off_nadir = _off_nadir(aircraft_ecef, satellite_ecef)
    slant_range = np.linalg.norm(satellite_ecef - aircraft_ecef, axis=-1)
    # Boundary inclusive: a satellite exactly on the mask is usable
    visible = (
        (elevation >= mask.min_elevation_deg)
        & (off_nadir <= mask.beam_half_angle_deg)
        & _clears_earth(aircraft_ecef, satellite_ecef)
    )
    return visible, elevation, slant_range


def is_visible(
    aircraft: AircraftState,
    sat: EciState,
    mask: VisibilityMask,
    sat_id: int = 0,
) -> tuple[bool, LinkSample]:
    """Decide whether an aircraft can connect to a satellite

    Raises:
        ValidationError: if the two states carry different time stamps
    """
    if abs(aircraft.t_s - sat.t_s) > _TIME_TOLERANCE_S:
        raise ValidationError(f"aircraft time {aircraft.t_s} s and satellite time {sat.t_s} s differ")
    observer = np.asarray(aircraft.ecef_m, dtype=float)[np.newaxis, :]
    satellite = eci_to_ecef(sat)[np.newaxis, :]
    visible, elevation, slant_range = visibility_series(observer, satellite, mask)
    sample = LinkSample(
        t_s=aircraft.t_s,
        sat_id=sat_id,
        elevation_deg=float(elevation[0]),
        slant_range_m=float(slant_range[0]),
        off_nadir_deg=float(_off_nadir(observer, satellite)[0]),
        visible=bool(visible[0]),
    )
    return sample.visible, sample


def satellite_ecef_track(elements: KeplerianElements, times_s: np.ndarray) -> np.ndarray:
    """Earth-fixed satellite positions over a time grid"""
    positions, _ = propagate_many(elements, times_s)
    return eci_to_ecef_many(positions, times_s)


def satellite_visibility(
    elements: KeplerianElements,
    flight: FlightPath,
    mask: VisibilityMask,
    grid: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Visibility, elevation and slant range of one satellite over the flight grid"""
    grid = flight.grid() if grid is None else np.asarray(grid, dtype=float)
    return visibility_series(flight.ecef_track(grid), satellite_ecef_track(elements, grid), mask)


def intervals_from_flags(grid: np.ndarray, visible: np.ndarray, step_s: float) -> list[tuple[float, float]]:
    """Maximal runs of True samples as half-open [start, end) intervals"""
    flags = np.concatenate([[False], np.asarray(visible, dtype=bool), [False]])
    edges = np.flatnonzero(np.diff(flags.astype(np.int8)))
    starts, stops = edges[0::2], edges[1::2]
    return [(float(grid[a]), float(grid[b - 1] + step_s)) for a, b in zip(starts, stops)]


def access_intervals(
    sat: KeplerianElements,
    flight: FlightPath,
    mask: VisibilityMask,
    grid: Optional[np.ndarray] = None,
) -> list[tuple[float, float]]:
    """Sorted, disjoint access windows of one satellite during the flight

    Args:
        sat: Satellite elements
        flight: Flight path providing aircraft positions
        mask: Visibility mask
        grid: Sample times; defaults to the flight grid. Must be evenly spaced.

    Returns:
        List of half-open [t_start, t_end) intervals on the grid
    """
    grid = flight.grid() if grid is None else np.asarray(grid, dtype=float)
    step = float(grid[1] - grid[0]) if len(grid) > 1 else flight.timestep_s
    if not step > 0:
        raise ValidationError(f"grid step {step} must be positive")
    visible, _, _ = satellite_visibility(sat, flight, mask, grid)
    return intervals_from_flags(grid, visible, step)


def max_central_angle(observer_radius_m, satellite_radius_m, mask: VisibilityMask):
    """Largest Earth central angle at which a satellite is still usable

    Combines the elevation mask with the beam cone: an off-nadir angle η and
    elevation e satisfy sin η = (r_obs/r_sat)·cos e, so the beam bounds the
    elevation from below. The line of sight always clears the Earth when the
    elevation is non-negative and the observer is above the surface.
    """
    observer_radius_m = np.asarray(observer_radius_m, dtype=float)
    satellite_radius_m = np.asarray(satellite_radius_m, dtype=float)
    ratio = satellite_radius_m * math.sin(math.radians(mask.beam_half_angle_deg)) / observer_radius_m
    beam_elevation = np.arccos(np.minimum(ratio, 1.0))
    elevation = np.maximum(math.radians(mask.min_elevation_deg), beam_elevation)
    return np.arccos(np.clip(observer_radius_m * np.cos(elevation) / satellite_radius_m, -1.0, 1.0)) - elevation
