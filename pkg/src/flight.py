"""Aircraft flight track along a great circle

Synthesizes a constant-speed, constant-altitude track between two airports,
or replays an explicit LLA sample table, and evaluates the aircraft position
on the simulation time grid.
"""

import csv
import logging
import math
import tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol

import numpy as np
from pydantic import BaseModel, ConfigDict
from pydantic import ValidationError as PydanticValidationError

from src.errors import ConfigError, OutOfRangeError, ValidationError
from src.orbital.elements import R_EARTH
from src.orbital.frames import Geodetic, ecef_to_geodetic

logger = logging.getLogger(__name__)

TRACK_HEADER = ["t_s", "lat_deg", "lon_deg", "alt_m"]
_TIME_EPSILON = 1e-9


def great_circle_distance(a: Geodetic, b: Geodetic, radius_m: float = R_EARTH) -> float:
    """Haversine distance between two points

    Args:
        a: First point
        b: Second point
        radius_m: Sphere radius the arc is measured on (Earth radius for bare points)

    Returns:
        Arc length in meters
    """
    return central_angle(a, b) * radius_m


def central_angle(a: Geodetic, b: Geodetic) -> float:
    d_lat = b.lat_rad - a.lat_rad
    d_lon = b.lon_rad - a.lon_rad
    h = math.sin(d_lat / 2) ** 2 + math.cos(a.lat_rad) * math.cos(b.lat_rad) * math.sin(d_lon / 2) ** 2
    return 2.0 * math.asin(min(1.0, math.sqrt(h)))


def _unit(g: Geodetic) -> np.ndarray:
    return np.array([
        math.cos(g.lat_rad) * math.cos(g.lon_rad),
        math.cos(g.lat_rad) * math.sin(g.lon_rad),
        math.sin(g.lat_rad),
    ])


def _slerp(start: np.ndarray, end: np.ndarray, angle: float, fraction: np.ndarray) -> np.ndarray:
    fraction = np.asarray(fraction, dtype=float)[..., np.newaxis]
    if angle == 0.0:
        return np.broadcast_to(start, fraction.shape[:-1] + (3,)).copy()
    sin_angle = math.sin(angle)
    return (np.sin((1.0 - fraction) * angle) * start + np.sin(fraction * angle) * end) / sin_angle


@dataclass(frozen=True)
class AircraftState:
    """Aircraft position at one simulation time"""

    t_s: float
    geodetic: Geodetic
    ecef_m: np.ndarray


class FlightPath(Protocol):
    """Anything that yields aircraft positions over a time window"""

    departure_t_s: float
    timestep_s: float

    @property
    def arrival_t_s(self) -> float: ...

    def position_at(self, t_s: float) -> AircraftState: ...

    def ecef_track(self, times_s: np.ndarray) -> np.ndarray: ...

    def grid(self) -> np.ndarray: ...


class _GridMixin:
    """Shared time-grid construction for flight paths"""

    def grid(self) -> np.ndarray:
        """Sample times covering [departure, arrival) at the path timestep

        Each sample stands for the half-open interval [t, t + timestep).
        """
        duration = self.arrival_t_s - self.departure_t_s
        count = max(1, int(math.ceil(duration / self.timestep_s - _TIME_EPSILON)))
        return self.departure_t_s + self.timestep_s * np.arange(count, dtype=float)

    @property
    def duration_s(self) -> float:
        return self.arrival_t_s - self.departure_t_s

    def _check_window(self, t_s: float):
        if t_s < self.departure_t_s - _TIME_EPSILON or t_s > self.arrival_t_s + _TIME_EPSILON:
            raise OutOfRangeError(
                f"time {t_s} s outside flight window "
                f"[{self.departure_t_s}, {self.arrival_t_s}] s"
            )


@dataclass(frozen=True)
class FlightPlan(_GridMixin):
    """Constant-speed, constant-altitude great-circle route"""

    origin: Geodetic
    destination: Geodetic
    cruise_alt_m: float = 11_000.0
    ground_speed_mps: float = 250.0
    departure_t_s: float = 0.0
    timestep_s: float = 1.0

    def __post_init__(self):
        if not self.ground_speed_mps > 0:
            raise ValidationError(f"ground speed {self.ground_speed_mps} m/s must be positive", key="ground_speed_mps")
        if not self.timestep_s > 0:
            raise ValidationError(f"timestep {self.timestep_s} s must be positive", key="timestep_s")
        if self.cruise_alt_m < 0:
            raise ValidationError(f"cruise altitude {self.cruise_alt_m} m must be non-negative", key="cruise_alt_m")
        angle = central_angle(self.origin, self.destination)
        if angle == 0.0:
            raise ValidationError("origin and destination coincide", key="destination")
        if math.pi - angle < 1e-12:
            raise ValidationError("origin and destination are antipodal; route is undefined", key="destination")

    @property
    def cruise_radius_m(self) -> float:
        return R_EARTH + self.cruise_alt_m

    @property
    def central_angle_rad(self) -> float:
        return central_angle(self.origin, self.destination)

    @property
    def distance_m(self) -> float:
        """Route length measured at cruise altitude"""
        return great_circle_distance(self.origin, self.destination, self.cruise_radius_m)

    @property
    def arrival_t_s(self) -> float:
        return self.departure_t_s + self.distance_m / self.ground_speed_mps

    def _fraction(self, times_s: np.ndarray) -> np.ndarray:
        fraction = (np.asarray(times_s, dtype=float) - self.departure_t_s) * self.ground_speed_mps / self.distance_m
        return np.clip(fraction, 0.0, 1.0)

    def ecef_track(self, times_s: np.ndarray) -> np.ndarray:
        """Vectorized aircraft ECEF positions (N, 3)"""
        units = _slerp(_unit(self.origin), _unit(self.destination), self.central_angle_rad,
                       self._fraction(times_s))
        return units * self.cruise_radius_m

    def position_at(self, t_s: float) -> AircraftState:
        """Aircraft state at t_s

        Raises:
            OutOfRangeError: if t_s lies outside [departure, arrival]
        """
        return position_at(self, t_s)


def position_at(plan: FlightPath, t_s: float) -> AircraftState:
    """Spherical interpolation of the aircraft position at t_s"""
    plan._check_window(t_s)
    ecef = plan.ecef_track(np.array([t_s], dtype=float))[0]
    return AircraftState(t_s=float(t_s), geodetic=ecef_to_geodetic(ecef), ecef_m=ecef)


@dataclass(frozen=True)
class TrackReplay(_GridMixin):
    """Recorded LLA track, interpolated along great circles between samples"""

    times_s: tuple[float, ...]
    samples: tuple[Geodetic, ...]
    timestep_s: float = 1.0
    source: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.times_s) < 2 or len(self.times_s) != len(self.samples):
            raise ValidationError("track needs at least two samples with matching times")
        if any(b <= a for a, b in zip(self.times_s, self.times_s[1:])):
            raise ValidationError("track times must be strictly increasing", key="t_s")
        if not self.timestep_s > 0:
            raise ValidationError(f"timestep {self.timestep_s} s must be positive", key="timestep_s")

    @property
    def departure_t_s(self) -> float:
        return self.times_s[0]

    @property
    def arrival_t_s(self) -> float:
        return self.times_s[-1]

    @property
    def origin(self) -> Geodetic:
        return self.samples[0]

    @property
    def destination(self) -> Geodetic:
        return self.samples[-1]

    def ecef_track(self, times_s: np.ndarray) -> np.ndarray:
        times_s = np.clip(np.asarray(times_s, dtype=float), self.departure_t_s, self.arrival_t_s)
        knots = np.asarray(self.times_s)
        segment = np.clip(np.searchsorted(knots, times_s, side="right") - 1, 0, len(knots) - 2)
        result = np.empty((len(times_s), 3))
        for index in np.unique(segment):
            chosen = segment == index
            start, end = self.samples[index], self.samples[index + 1]
            fraction = (times_s[chosen] - knots[index]) / (knots[index + 1] - knots[index])
            units = _slerp(_unit(start), _unit(end), central_angle(start, end), fraction)
            altitude = start.alt_m + fraction * (end.alt_m - start.alt_m)
            result[chosen] = units * (R_EARTH + altitude)[:, np.newaxis]
        return result

    def position_at(self, t_s: float) -> AircraftState:
        return position_at(self, t_s)


class FlightPlanModel(BaseModel):
    """Key/value layout of a flight-plan section"""

    model_config = ConfigDict(extra="forbid")

    origin_lat_deg: Optional[float] = None
    origin_lon_deg: Optional[float] = None
    destination_lat_deg: Optional[float] = None
    destination_lon_deg: Optional[float] = None
    cruise_alt_m: float = 11_000.0
    ground_speed_mps: float = 250.0
    departure_t_s: float = 0.0
    timestep_s: float = 1.0
    track_csv: Optional[str] = None


def build_flight(model: FlightPlanModel, base_dir: Optional[Path] = None, file: Optional[str] = None) -> FlightPath:
    """Turn a parsed flight section into a FlightPlan or TrackReplay"""
    if model.track_csv:
        track_path = Path(model.track_csv)
        if base_dir is not None and not track_path.is_absolute():
            track_path = base_dir / track_path
        return load_track(track_path, timestep_s=model.timestep_s)

    endpoints = {
        "origin_lat_deg": model.origin_lat_deg,
        "origin_lon_deg": model.origin_lon_deg,
        "destination_lat_deg": model.destination_lat_deg,
        "destination_lon_deg": model.destination_lon_deg,
    }
    for key, value in endpoints.items():
        if value is None:
            raise ConfigError("missing flight endpoint", file=file, section="flight", key=key)
    try:
        return FlightPlan(
            origin=Geodetic.from_degrees(model.origin_lat_deg, model.origin_lon_deg, model.cruise_alt_m),
            destination=Geodetic.from_degrees(model.destination_lat_deg, model.destination_lon_deg,
                                              model.cruise_alt_m),
            cruise_alt_m=model.cruise_alt_m,
            ground_speed_mps=model.ground_speed_mps,
            departure_t_s=model.departure_t_s,
            timestep_s=model.timestep_s,
        )
    except ValidationError as e:
        raise ValidationError(e.message, file=file, section="flight", key=e.key) from e


def load_flight_plan(path) -> FlightPath:
    """Load a flight plan from a scenario TOML file or a CSV track

    Args:
        path: `.toml` file with a [flight] section, or a `.csv` track

    Raises:
        ConfigError: file missing or malformed (names the offending field)
        ValidationError: parsed values violate flight-plan invariants
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError("flight plan file not found", file=str(path))
    if path.suffix.lower() == ".csv":
        return load_track(path)

    try:
        with open(path, "rb") as f:
            document = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"cannot parse TOML: {e}", file=str(path)) from e

    section = document.get("flight", document)
    try:
        model = FlightPlanModel.model_validate(section)
    except PydanticValidationError as e:
        error = e.errors()[0]
        key = ".".join(str(part) for part in error["loc"])
        raise ConfigError(error["msg"], file=str(path), section="flight", key=key) from e
    logger.info(f"Loaded flight plan from {path}")
    return build_flight(model, base_dir=path.parent, file=str(path))


def load_track(path, timestep_s: float = 1.0) -> TrackReplay:
    """Load an explicit LLA track (`t_s,lat_deg,lon_deg,alt_m`)"""
    path = Path(path)
    if not path.exists():
        raise ConfigError("track file not found", file=str(path))
    times: list[float] = []
    samples: list[Geodetic] = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != TRACK_HEADER:
            raise ConfigError(f"track header must be {','.join(TRACK_HEADER)}", file=str(path))
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(TRACK_HEADER):
                raise ConfigError(f"line {line_number}: expected {len(TRACK_HEADER)} columns", file=str(path))
            try:
                t, lat, lon, alt = (float(value) for value in row)
            except ValueError as e:
                raise ConfigError(f"line {line_number}: {e}", file=str(path)) from e
            times.append(t)
            samples.append(Geodetic.from_degrees(lat, lon, alt))
    logger.info(f"Loaded {len(samples)} track samples from {path}")
    return TrackReplay(times_s=tuple(times), samples=tuple(samples), timestep_s=timestep_s, source=str(path))
