"""Coordinate frames on a spherical Earth

Greenwich angle is zero at simulation time 0 and advances at the sidereal
rate, so ECI and ECEF coincide at the start of every scenario.
"""

import math
from dataclasses import dataclass

import numpy as np

from src.errors import ValidationError
from src.orbital.elements import R_EARTH, EciState

OMEGA_EARTH = 7.2921159e-5  # rad/s
SIDEREAL_DAY_S = 2.0 * math.pi / OMEGA_EARTH


@dataclass(frozen=True)
class Geodetic:
    """Latitude/longitude/altitude on the spherical Earth"""

    lat_rad: float
    lon_rad: float
    alt_m: float = 0.0

    def __post_init__(self):
        if not -math.pi / 2 <= self.lat_rad <= math.pi / 2:
            raise ValidationError(f"latitude {self.lat_rad} rad outside [-π/2, π/2]")
        if not -math.pi <= self.lon_rad < math.pi:
            raise ValidationError(f"longitude {self.lon_rad} rad outside [-π, π)")
        if self.alt_m < 0:
            raise ValidationError(f"altitude {self.alt_m} m must be non-negative")

    @classmethod
    def from_degrees(cls, lat_deg: float, lon_deg: float, alt_m: float = 0.0) -> "Geodetic":
        """Build from degrees, wrapping longitude into [-180, 180)"""
        lon_deg = ((lon_deg + 180.0) % 360.0) - 180.0
        return cls(math.radians(lat_deg), math.radians(lon_deg), alt_m)

    @property
    def lat_deg(self) -> float:
        return math.degrees(self.lat_rad)

    @property
    def lon_deg(self) -> float:
        return math.degrees(self.lon_rad)


def greenwich_angle(t_s):
    """Earth rotation angle θ(t) = ω_E·t, with θ₀ = 0 at simulation start"""
    return OMEGA_EARTH * np.asarray(t_s, dtype=float)


def eci_to_ecef_many(positions_m: np.ndarray, times_s: np.ndarray) -> np.ndarray:
    """Rotate inertial positions (N, 3) into the Earth-fixed frame"""
    positions_m = np.atleast_2d(positions_m)
    theta = greenwich_angle(times_s)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    x, y, z = positions_m[:, 0], positions_m[:, 1], positions_m[:, 2]
    return np.stack([cos_t * x + sin_t * y, -sin_t * x + cos_t * y, z], axis=-1)


def eci_to_ecef(state: EciState) -> np.ndarray:
    """Earth-fixed position of an inertial state"""
    return eci_to_ecef_many(state.position_m[np.newaxis, :], np.array([state.t_s]))[0]


def geodetic_to_ecef(g: Geodetic) -> np.ndarray:
    radius = R_EARTH + g.alt_m
    return np.array([
        radius * math.cos(g.lat_rad) * math.cos(g.lon_rad),
        radius * math.cos(g.lat_rad) * math.sin(g.lon_rad),
        radius * math.sin(g.lat_rad),
    ])


def ecef_to_geodetic(v) -> Geodetic:
    """Spherical geodetic coordinates of an ECEF vector

    At the poles longitude is undefined and returned as 0.
    """
    x, y, z = (float(c) for c in v)
    horizontal = math.hypot(x, y)
    radius = math.sqrt(horizontal * horizontal + z * z)
    if radius == 0.0:
        raise ValidationError("cannot convert the Earth's center to geodetic coordinates")
    lat = math.atan2(z, horizontal)
    lon = math.atan2(y, x) if horizontal > 0.0 else 0.0
    if lon >= math.pi:
        lon -= 2.0 * math.pi
    return Geodetic(lat_rad=lat, lon_rad=lon, alt_m=max(radius - R_EARTH, 0.0))


def spherical_coordinates(positions_m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized (latitude, longitude, radius) of position arrays (N, 3)"""
    positions_m = np.atleast_2d(positions_m)
    horizontal = np.hypot(positions_m[:, 0], positions_m[:, 1])
    radius = np.sqrt(horizontal**2 + positions_m[:, 2] ** 2)
    return (np.arctan2(positions_m[:, 2], horizontal),
            np.arctan2(positions_m[:, 1], positions_m[:, 0]),
            radius)
