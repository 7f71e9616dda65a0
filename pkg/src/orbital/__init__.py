"""Orbital mechanics and reference frames"""

from .elements import (
    MU_EARTH,
    R_EARTH,
    EciState,
    KeplerianElements,
    orbital_period,
    propagate,
    propagate_many,
    solve_kepler,
)
from .frames import (
    OMEGA_EARTH,
    SIDEREAL_DAY_S,
    Geodetic,
    eci_to_ecef,
    eci_to_ecef_many,
    ecef_to_geodetic,
    geodetic_to_ecef,
)

__all__ = [
    "MU_EARTH",
    "R_EARTH",
    "OMEGA_EARTH",
    "SIDEREAL_DAY_S",
    "EciState",
    "KeplerianElements",
    "Geodetic",
    "orbital_period",
    "propagate",
    "propagate_many",
    "solve_kepler",
    "eci_to_ecef",
    "eci_to_ecef_many",
    "ecef_to_geodetic",
    "geodetic_to_ecef",
]
