"""Exhaustive RAAN / true-anomaly grid search for satellite insertion

Every candidate shares the policy's element template, so a candidate's
inertial position is a zero-RAAN orbit position rotated about the pole by
the RAAN. On a spherical Earth, visibility depends only on the Earth central
angle between sub-satellite point and aircraft, which turns the visible RAAN
values at one (anomaly, time) pair into a single arc. Scores for the whole
RAAN axis then accumulate with a difference array instead of a per-cell
propagation.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.errors import PreconditionError, UnreachableRouteError, ValidationError
from src.flight import FlightPath
from src.orbital.elements import (
    TWO_PI,
    KeplerianElements,
    orbital_period,
    plane_positions,
    true_to_eccentric_anomaly,
)
from src.orbital.frames import greenwich_angle, spherical_coordinates
from src.visibility import VisibilityMask, max_central_angle

logger = logging.getLogger(__name__)

_ANOMALY_CHUNK = 24


@dataclass(frozen=True)
class ElementTemplate:
    """Orbit shape shared by every inserted satellite"""

    sma_m: float = 7.2e6
    eccentricity: float = 0.05
    inclination_deg: float = 70.0
    arg_periapsis_deg: float = 0.0

    def elements(self, raan_deg: float, true_anomaly_deg: float, epoch_s: float) -> KeplerianElements:
        return KeplerianElements.from_degrees(
            sma_m=self.sma_m,
            eccentricity=self.eccentricity,
            inclination_deg=self.inclination_deg,
            raan_deg=raan_deg,
            arg_periapsis_deg=self.arg_periapsis_deg,
            true_anomaly_deg=true_anomaly_deg,
            epoch_s=epoch_s,
        )


def _cells(step_deg: float, name: str) -> int:
    count = int(round(360.0 / step_deg))
    if count < 1 or abs(count * step_deg - 360.0) > 1e-9:
        raise ValidationError(f"{name} {step_deg} deg must divide 360", key=name)
    return count


@dataclass(frozen=True)
class InsertionPolicy:
    """Parameters of the sequential insertion heuristic"""

    connect_timeout_s: float = 120.0
    max_satellites: int = 40
    search_raan_step_deg: float = 1.0
    search_anomaly_step_deg: float = 1.0
    lookahead_s: Optional[float] = None
    template: ElementTemplate = field(default_factory=ElementTemplate)

    def __post_init__(self):
        if not self.connect_timeout_s > 0:
            raise ValidationError("connect timeout must be positive", key="connect_timeout_s")
        if self.max_satellites < 1:
            raise ValidationError("max_satellites must be at least 1", key="max_satellites")
        if not (self.search_raan_step_deg > 0 and self.search_anomaly_step_deg > 0):
            raise ValidationError("search steps must be positive", key="search_raan_step_deg")
        _cells(self.search_raan_step_deg, "search_raan_step_deg")
        _cells(self.search_anomaly_step_deg, "search_anomaly_step_deg")
        if self.lookahead_s is not None and not self.lookahead_s > 0:
            raise ValidationError("lookahead must be positive", key="lookahead_s")

    @property
    def effective_lookahead_s(self) -> float:
        """Configured lookahead, defaulting to one orbital period of the template"""
        if self.lookahead_s is not None:
            return self.lookahead_s
        return orbital_period(self.template.sma_m)

    @property
    def n_raan_cells(self) -> int:
        return _cells(self.search_raan_step_deg, "search_raan_step_deg")

    @property
    def n_anomaly_cells(self) -> int:
        return _cells(self.search_anomaly_step_deg, "search_anomaly_step_deg")


@dataclass(frozen=True)
class SearchResult:
    """Winning grid cell and its score"""

    raan_deg: float
    true_anomaly_deg: float
    elements: KeplerianElements
    covered_samples: int
    visible_at_start: bool


@dataclass
class CoverageState:
    """Coverage accumulated so far on the flight grid"""

    flight: FlightPath
    covered: np.ndarray
    cursor: int = 0

    def first_gap(self) -> Optional[int]:
        """Index of the first uncovered sample at or after the cursor"""
        remaining = np.flatnonzero(~self.covered[self.cursor:])
        return None if len(remaining) == 0 else self.cursor + int(remaining[0])


class ElementSearch:
    """Grid search over RAAN and true anomaly for one insertion"""

    def __init__(self, flight: FlightPath, policy: InsertionPolicy, mask: VisibilityMask, threads: int = 1):
        self.flight = flight
        self.policy = policy
        self.mask = mask
        self.threads = max(1, threads)
        self.grid = flight.grid()
        self.epoch_s = float(flight.departure_t_s)
        template = policy.template
        self.raan_values_deg = np.arange(policy.n_raan_cells) * policy.search_raan_step_deg
        self.anomaly_values_deg = np.arange(policy.n_anomaly_cells) * policy.search_anomaly_step_deg
        eccentric = true_to_eccentric_anomaly(np.radians(self.anomaly_values_deg), template.eccentricity)
        self.mean_anomaly_at_epoch = np.mod(eccentric - template.eccentricity * np.sin(eccentric), TWO_PI)
        self.mean_motion = template.elements(0.0, 0.0, self.epoch_s).mean_motion
        aircraft = flight.ecef_track(self.grid)
        self.aircraft_lat, self.aircraft_lon, self.aircraft_radius = spherical_coordinates(aircraft)

    def best_cell(self, start_index: int, weights: np.ndarray) -> SearchResult:
        """Highest-scoring cell over [grid[start], grid[start] + lookahead)

        Cells visible at the window start are preferred; among them the one
        covering the most weighted samples wins. Ties go to the lowest RAAN,
        then the lowest anomaly.

        Raises:
            UnreachableRouteError: if no cell sees any weighted sample
        """
        stop_time = self.grid[start_index] + self.policy.effective_lookahead_s
        stop_index = int(np.searchsorted(self.grid, stop_time, side="left"))
        window = np.arange(start_index, max(stop_index, start_index + 1))
        window_weights = np.asarray(weights, dtype=float)[window]

        chunks = [np.arange(i, min(i + _ANOMALY_CHUNK, len(self.anomaly_values_deg)))
                  for i in range(0, len(self.anomaly_values_deg), _ANOMALY_CHUNK)]
        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                parts = list(pool.map(lambda c: self._score_chunk(c, window, window_weights), chunks))
        else:
            parts = [self._score_chunk(c, window, window_weights) for c in chunks]
        score = np.concatenate([p[0] for p in parts], axis=1)
        at_start = np.concatenate([p[1] for p in parts], axis=1)

        if not np.any(score > 0):
            raise UnreachableRouteError(
                f"no RAAN/anomaly cell of the template sees the route after t={self.grid[start_index]:.1f} s"
            )
        ranked = np.where(at_start > 0, score, -1.0) if np.any(at_start > 0) else score
        flat = int(np.argmax(ranked))
        raan_index, anomaly_index = np.unravel_index(flat, ranked.shape)
        raan_deg = float(self.raan_values_deg[raan_index])
        anomaly_deg = float(self.anomaly_values_deg[anomaly_index])
        return SearchResult(
            raan_deg=raan_deg,
            true_anomaly_deg=anomaly_deg,
            elements=self.policy.template.elements(raan_deg, anomaly_deg, self.epoch_s),
            covered_samples=int(round(score[raan_index, anomaly_index])),
            visible_at_start=bool(at_start[raan_index, anomaly_index] > 0),
        )

    def _score_chunk(self, anomaly_indices: np.ndarray, window: np.ndarray, weights: np.ndarray):
        template = self.policy.template
        n_raan = len(self.raan_values_deg)
        step = math.radians(self.policy.search_raan_step_deg)
        times = self.grid[window]

        mean_anomaly = (self.mean_anomaly_at_epoch[anomaly_indices][:, np.newaxis]
                        + self.mean_motion * (times - self.epoch_s)[np.newaxis, :])
        positions = plane_positions(template.sma_m, template.eccentricity,
                                    math.radians(template.inclination_deg),
                                    math.radians(template.arg_periapsis_deg),
                                    mean_anomaly.ravel())
        sat_lat, sat_lon, sat_radius = spherical_coordinates(positions)
        shape = mean_anomaly.shape
        sat_lat, sat_lon, sat_radius = sat_lat.reshape(shape), sat_lon.reshape(shape), sat_radius.reshape(shape)

        air_lat = self.aircraft_lat[window][np.newaxis, :]
        air_lon = self.aircraft_lon[window][np.newaxis, :]
        air_radius = self.aircraft_radius[window][np.newaxis, :]
        cos_limit = np.cos(max_central_angle(air_radius, sat_radius, self.mask))

        # Visible iff cos(Δλ) ≥ threshold, Δλ = λ_sat + Ω − θ(t) − λ_air
        denominator = np.cos(sat_lat) * np.cos(air_lat)
        numerator = cos_limit - np.sin(sat_lat) * np.sin(air_lat)
        with np.errstate(divide="ignore", invalid="ignore"):
            threshold = np.where(denominator > 1e-12, numerator / denominator,
                                 np.where(numerator <= 0.0, -np.inf, np.inf))
        half_width = np.arccos(np.clip(threshold, -1.0, 1.0))
        offset = sat_lon - greenwich_angle(times)[np.newaxis, :] - air_lon

        low = np.ceil((-offset - half_width) / step - 1e-9)
        high = np.floor((-offset + half_width) / step + 1e-9)
        length = np.clip(high - low + 1.0, 0.0, n_raan)
        length = np.where(threshold > 1.0, 0.0, np.where(threshold <= -1.0, n_raan, length))
        start = np.mod(low, n_raan).astype(np.int64)
        length = length.astype(np.int64)

        n_chunk = len(anomaly_indices)
        width = 2 * n_raan + 1
        row_offset = (np.arange(n_chunk) * width)[:, np.newaxis]
        start_bins = (row_offset + start).ravel()
        stop_bins = (row_offset + start + length).ravel()
        weight_grid = np.broadcast_to(weights[np.newaxis, :], shape).ravel()
        first_grid = np.zeros(shape)
        first_grid[:, 0] = 1.0
        first_grid = first_grid.ravel()

        def accumulate(sample_weights: np.ndarray) -> np.ndarray:
            size = n_chunk * width
            delta = (np.bincount(start_bins, weights=sample_weights, minlength=size)
                     - np.bincount(stop_bins, weights=sample_weights, minlength=size))
            running = np.cumsum(delta.reshape(n_chunk, width), axis=1)
            folded = running[:, :n_raan] + running[:, n_raan:2 * n_raan]
            return folded.T

        return accumulate(weight_grid), accumulate(first_grid)


def initial_satellite(
    flight: FlightPath,
    policy: InsertionPolicy,
    mask: VisibilityMask,
    search: Optional[ElementSearch] = None,
) -> KeplerianElements:
    """Elements maximizing visible duration from departure

    Raises:
        UnreachableRouteError: if no grid cell sees the route
    """
    search = search or ElementSearch(flight, policy, mask)
    weights = np.ones(len(search.grid))
    return search.best_cell(0, weights).elements


def next_satellite(
    state: CoverageState,
    policy: InsertionPolicy,
    mask: VisibilityMask,
    search: Optional[ElementSearch] = None,
) -> KeplerianElements:
    """Elements maximizing new coverage of [t_gap, t_gap + lookahead)

    Only uncovered samples score, and cells visible at t_gap win over those
    that are not.

    Raises:
        PreconditionError: if the flight has no uncovered sample past the cursor
        UnreachableRouteError: if no grid cell sees the uncovered window
    """
    gap = state.first_gap()
    if gap is None:
        raise PreconditionError("no uncovered segment remains; nothing to insert")
    search = search or ElementSearch(state.flight, policy, mask)
    return search.best_cell(gap, (~state.covered).astype(float)).elements
