"""Two-body Keplerian propagation

Closed-form propagation of osculating elements: mean anomaly advances
linearly, Kepler's equation maps it to eccentric anomaly, and the perifocal
state is rotated into the Earth-centered inertial frame.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from src.errors import ConvergenceError, OutOfRangeError, ValidationError

MU_EARTH = 3.986004418e14  # m^3/s^2
R_EARTH = 6_371_000.0  # m, spherical Earth
TWO_PI = 2.0 * math.pi

KEPLER_TOLERANCE = 1e-13
KEPLER_MAX_ITERATIONS = 50

ArrayLike = Union[float, np.ndarray]


def normalize_angle(angle_rad: float) -> float:
    """Wrap an angle into [0, 2π)"""
    wrapped = math.fmod(angle_rad, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    if wrapped >= TWO_PI:
        wrapped -= TWO_PI
    return wrapped


@dataclass(frozen=True)
class KeplerianElements:
    """Six classical elements of one satellite orbit plus their epoch"""

    sma_m: float
    eccentricity: float
    inclination_rad: float
    raan_rad: float
    arg_periapsis_rad: float
    true_anomaly_at_epoch_rad: float
    epoch_s: float = 0.0

    def __post_init__(self):
        if not self.sma_m > R_EARTH:
            raise ValidationError(f"semi-major axis {self.sma_m} m must exceed Earth radius")
        if not 0.0 <= self.eccentricity < 1.0:
            raise ValidationError(f"eccentricity {self.eccentricity} must lie in [0, 1)")
        for name in ("inclination_rad", "raan_rad", "arg_periapsis_rad", "true_anomaly_at_epoch_rad"):
            object.__setattr__(self, name, normalize_angle(float(getattr(self, name))))

    @classmethod
    def from_degrees(
        cls,
        sma_m: float,
        eccentricity: float,
        inclination_deg: float,
        raan_deg: float,
        arg_periapsis_deg: float,
        true_anomaly_deg: float,
        epoch_s: float = 0.0,
    ) -> "KeplerianElements":
        """Build elements from angles given in degrees"""
        return cls(
            sma_m=sma_m,
            eccentricity=eccentricity,
            inclination_rad=math.radians(inclination_deg),
            raan_rad=math.radians(raan_deg),
            arg_periapsis_rad=math.radians(arg_periapsis_deg),
            true_anomaly_at_epoch_rad=math.radians(true_anomaly_deg),
            epoch_s=epoch_s,
        )

    @property
    def mean_motion(self) -> float:
        """Mean motion n = sqrt(μ/a³), rad/s"""
        return math.sqrt(MU_EARTH / self.sma_m**3)

    @property
    def period_s(self) -> float:
        return orbital_period(self.sma_m)

    @property
    def mean_anomaly_at_epoch_rad(self) -> float:
        eccentric = true_to_eccentric_anomaly(self.true_anomaly_at_epoch_rad, self.eccentricity)
        return normalize_angle(eccentric - self.eccentricity * math.sin(eccentric))

    @property
    def specific_energy(self) -> float:
        return -MU_EARTH / (2.0 * self.sma_m)

    def to_dict(self) -> dict:
        """Degrees-based representation for reports"""
        return {
            "sma_m": self.sma_m,
            "eccentricity": self.eccentricity,
            "inclination_deg": math.degrees(self.inclination_rad),
            "raan_deg": math.degrees(self.raan_rad),
            "arg_periapsis_deg": math.degrees(self.arg_periapsis_rad),
            "true_anomaly_deg": math.degrees(self.true_anomaly_at_epoch_rad),
            "epoch_s": self.epoch_s,
        }


@dataclass(frozen=True)
class EciState:
    """Position and velocity in the Earth-centered inertial frame"""

    position_m: np.ndarray
    velocity_mps: np.ndarray
    t_s: float

    @property
    def specific_energy(self) -> float:
        r = float(np.linalg.norm(self.position_m))
        v = float(np.linalg.norm(self.velocity_mps))
        return 0.5 * v * v - MU_EARTH / r

    @property
    def angular_momentum(self) -> np.ndarray:
        return np.cross(self.position_m, self.velocity_mps)


def orbital_period(sma_m: float) -> float:
    """Orbital period T = 2π·sqrt(a³/μ), seconds"""
    if not sma_m > 0:
        raise ValidationError(f"semi-major axis {sma_m} must be positive")
    return TWO_PI * math.sqrt(sma_m**3 / MU_EARTH)


def _solve_kepler_array(mean_anomaly: np.ndarray, eccentricity: np.ndarray) -> np.ndarray:
    # Newton iteration safeguarded by the bracket E ∈ [M − e, M + e]
    mean_anomaly = np.asarray(mean_anomaly, dtype=float)
    eccentricity = np.broadcast_to(np.asarray(eccentricity, dtype=float), mean_anomaly.shape)
    estimate = np.where(eccentricity < 0.8, mean_anomaly, math.pi)
    low = mean_anomaly - eccentricity
    high = mean_anomaly + eccentricity
    estimate = np.clip(estimate, low, high)

    for _ in range(KEPLER_MAX_ITERATIONS):
        residual = estimate - eccentricity * np.sin(estimate) - mean_anomaly
        if np.all(np.abs(residual) <= KEPLER_TOLERANCE):
            return estimate
        low = np.where(residual < 0.0, estimate, low)
        high = np.where(residual > 0.0, estimate, high)
        step = estimate - residual / (1.0 - eccentricity * np.cos(estimate))
        inside = (step > low) & (step < high)
        estimate = np.where(np.abs(residual) <= KEPLER_TOLERANCE, estimate,
                            np.where(inside, step, 0.5 * (low + high)))

    residual = estimate - eccentricity * np.sin(estimate) - mean_anomaly
    if np.all(np.abs(residual) <= KEPLER_TOLERANCE):
        return estimate
    worst = float(np.max(np.abs(residual)))
    raise ConvergenceError(
        f"Kepler solver did not converge in {KEPLER_MAX_ITERATIONS} iterations "
        f"(worst residual {worst:.3e})"
    )


def solve_kepler(mean_anomaly_rad: float, eccentricity: float) -> float:
    """Solve M = E − e·sin(E) for the eccentric anomaly E

    The start is E₀ = M, or π when e ≥ 0.8, clipped into the bracket
    [M − e, M + e] that always holds the root. A Newton step that would
    leave the shrinking bracket is replaced by a bisection step, so the
    result can differ from plain Newton only in the iteration count.

    Args:
        mean_anomaly_rad: Mean anomaly, normalized to [0, 2π) before solving
        eccentricity: Orbit eccentricity in [0, 1)

    Returns:
        Eccentric anomaly in radians with residual below 1e-12

    Raises:
        ConvergenceError: if the safeguarded iteration fails within 50 steps
    """
    if not 0.0 <= eccentricity < 1.0:
        raise ValidationError(f"eccentricity {eccentricity} must lie in [0, 1)")
    mean_anomaly = normalize_angle(mean_anomaly_rad)
    return float(_solve_kepler_array(np.array(mean_anomaly), np.array(eccentricity)))


def solve_kepler_many(mean_anomaly_rad: np.ndarray, eccentricity: ArrayLike) -> np.ndarray:
    """Vectorized solve_kepler over an array of mean anomalies"""
    mean_anomaly = np.mod(np.asarray(mean_anomaly_rad, dtype=float), TWO_PI)
    return _solve_kepler_array(mean_anomaly, np.asarray(eccentricity, dtype=float))


def true_to_eccentric_anomaly(true_anomaly: ArrayLike, eccentricity: float) -> ArrayLike:
    half = np.asarray(true_anomaly) / 2.0
    result = 2.0 * np.arctan2(
        math.sqrt(1.0 - eccentricity) * np.sin(half),
        math.sqrt(1.0 + eccentricity) * np.cos(half),
    )
    return float(result) if np.ndim(result) == 0 else result


def eccentric_to_true_anomaly(eccentric: ArrayLike, eccentricity: float) -> ArrayLike:
    half = np.asarray(eccentric) / 2.0
    result = 2.0 * np.arctan2(
        math.sqrt(1.0 + eccentricity) * np.sin(half),
        math.sqrt(1.0 - eccentricity) * np.cos(half),
    )
    return float(result) if np.ndim(result) == 0 else result


def perifocal_to_eci_matrix(inclination_rad: float, raan_rad: float, arg_periapsis_rad: float) -> np.ndarray:
    """Rotation Rz(Ω)·Rx(i)·Rz(ω) from the perifocal to the inertial frame"""
    cos_o, sin_o = math.cos(raan_rad), math.sin(raan_rad)
    cos_i, sin_i = math.cos(inclination_rad), math.sin(inclination_rad)
    cos_w, sin_w = math.cos(arg_periapsis_rad), math.sin(arg_periapsis_rad)
    return np.array([
        [cos_o * cos_w - sin_o * sin_w * cos_i, -cos_o * sin_w - sin_o * cos_w * cos_i, sin_o * sin_i],
        [sin_o * cos_w + cos_o * sin_w * cos_i, -sin_o * sin_w + cos_o * cos_w * cos_i, -cos_o * sin_i],
        [sin_w * sin_i, cos_w * sin_i, cos_i],
    ])


def _perifocal_states(sma_m: float, eccentricity: float, eccentric: np.ndarray):
    true_anomaly = eccentric_to_true_anomaly(eccentric, eccentricity)
    radius = sma_m * (1.0 - eccentricity * np.cos(eccentric))
    semi_latus = sma_m * (1.0 - eccentricity**2)
    speed_scale = math.sqrt(MU_EARTH / semi_latus)
    position = np.stack([radius * np.cos(true_anomaly), radius * np.sin(true_anomaly),
                         np.zeros_like(radius)], axis=-1)
    velocity = np.stack([-speed_scale * np.sin(true_anomaly),
                         speed_scale * (eccentricity + np.cos(true_anomaly)),
                         np.zeros_like(radius)], axis=-1)
    return position, velocity


def propagate(elements: KeplerianElements, t_s: float) -> EciState:
    """Two-body state at simulation time t_s

    Raises:
        OutOfRangeError: if t_s precedes the element epoch
    """
    if t_s < elements.epoch_s:
        raise OutOfRangeError(f"time {t_s} s precedes element epoch {elements.epoch_s} s")
    positions, velocities = propagate_many(elements, np.array([t_s], dtype=float))
    return EciState(position_m=positions[0], velocity_mps=velocities[0], t_s=float(t_s))


def propagate_many(elements: KeplerianElements, times_s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized propagation over a time array

    Returns:
        Tuple of (positions (N, 3), velocities (N, 3)) in the inertial frame
    """
    times_s = np.asarray(times_s, dtype=float)
    mean_anomaly = elements.mean_anomaly_at_epoch_rad + elements.mean_motion * (times_s - elements.epoch_s)
    eccentric = solve_kepler_many(mean_anomaly, elements.eccentricity)
    position_pf, velocity_pf = _perifocal_states(elements.sma_m, elements.eccentricity, eccentric)
    rotation = perifocal_to_eci_matrix(
        elements.inclination_rad, elements.raan_rad, elements.arg_periapsis_rad
    )
    return position_pf @ rotation.T, velocity_pf @ rotation.T


def plane_positions(
    sma_m: float,
    eccentricity: float,
    inclination_rad: float,
    arg_periapsis_rad: float,
    mean_anomaly: np.ndarray,
) -> np.ndarray:
    """Inertial positions of a zero-RAAN orbit at the given mean anomalies

    Rotating the result about z by the RAAN gives the position for any
    ascending-node longitude, which is what the element grid search uses.
    """
    eccentric = solve_kepler_many(mean_anomaly, eccentricity)
    position_pf, _ = _perifocal_states(sma_m, eccentricity, eccentric)
    rotation = perifocal_to_eci_matrix(inclination_rad, 0.0, arg_periapsis_rad)
    return position_pf @ rotation.T
