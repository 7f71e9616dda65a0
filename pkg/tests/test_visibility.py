#!/usr/bin/env python3
"""Test suite for aircraft-satellite link geometry"""

import math

import numpy as np
import pytest

from src.flight import FlightPlan
from src.orbital import R_EARTH, EciState, Geodetic, KeplerianElements, geodetic_to_ecef
from src.visibility import (
    VisibilityMask,
    access_intervals,
    elevation_angle,
    is_visible,
    max_central_angle,
    satellite_visibility,
    visibility_series,
)
from src.errors import ValidationError


@pytest.fixture
def equator_flight():
    """One degree of eastbound flight along the equator (about 445 s)"""
    return FlightPlan(origin=Geodetic.from_degrees(0.0, 0.0, 11_000.0),
                      destination=Geodetic.from_degrees(0.0, 1.0, 11_000.0))


def _equatorial(anomaly_deg):
    return KeplerianElements.from_degrees(7.2e6, 0.0, 0.0, 0.0, 0.0, anomaly_deg)


def test_elevation_zenith_and_horizon():
    """Test satellites overhead and on the horizon plane"""
    observer = np.array([R_EARTH, 0.0, 0.0])
    assert elevation_angle(observer, [R_EARTH + 800e3, 0.0, 0.0]) == pytest.approx(90.0)
    assert elevation_angle(observer, [R_EARTH, 1.0e6, 0.0]) == pytest.approx(0.0, abs=1e-9)


def test_elevation_law_of_cosines_oracle():
    """Test elevation of a satellite 10 degrees east at 829 km against a planar triangle"""
    observer = geodetic_to_ecef(Geodetic.from_degrees(0.0, 0.0, 11_000.0))
    satellite = geodetic_to_ecef(Geodetic.from_degrees(0.0, 10.0, 829_000.0))
    r_o, r_s, psi = R_EARTH + 11_000.0, R_EARTH + 829_000.0, math.radians(10.0)
    distance = math.sqrt(r_o**2 + r_s**2 - 2 * r_o * r_s * math.cos(psi))
    expected = math.degrees(math.asin((r_s * math.cos(psi) - r_o) / distance))
    assert elevation_angle(observer, satellite) == pytest.approx(expected, abs=1e-9)
    assert expected == pytest.approx(29.54, abs=0.01)


def test_is_visible_zenith_and_far_side(equator_flight):
    """Test a satellite overhead is visible and one behind the Earth is not"""
    aircraft = equator_flight.position_at(0.0)
    above = EciState(np.array([7.2e6, 0.0, 0.0]), np.zeros(3), 0.0)
    behind = EciState(np.array([-7.2e6, 0.0, 0.0]), np.zeros(3), 0.0)
    visible, sample = is_visible(aircraft, above, VisibilityMask())
    assert visible
    assert sample.elevation_deg == pytest.approx(90.0)
    assert sample.slant_range_m == pytest.approx(7.2e6 - R_EARTH - 11_000.0)
    assert not is_visible(aircraft, behind, VisibilityMask())[0]


def test_is_visible_mask_boundary_inclusive(equator_flight):
    """Test a satellite exactly on the elevation mask counts as visible"""
    aircraft = equator_flight.position_at(0.0)
    satellite = geodetic_to_ecef(Geodetic.from_degrees(0.0, 10.0, 829_000.0))
    boundary = elevation_angle(aircraft.ecef_m, satellite)
    mask = VisibilityMask(min_elevation_deg=boundary, beam_half_angle_deg=90.0)
    state = EciState(satellite, np.zeros(3), 0.0)
    assert is_visible(aircraft, state, mask)[0]


def test_is_visible_requires_matching_times(equator_flight):
    """Test mismatched time stamps are rejected"""
    aircraft = equator_flight.position_at(0.0)
    state = EciState(np.array([7.2e6, 0.0, 0.0]), np.zeros(3), 5.0)
    with pytest.raises(ValidationError):
        is_visible(aircraft, state, VisibilityMask())


def test_mask_validation():
    """Test out-of-range masks are rejected"""
    with pytest.raises(ValidationError):
        VisibilityMask(min_elevation_deg=90.0)
    with pytest.raises(ValidationError):
        VisibilityMask(beam_half_angle_deg=0.0)


def test_access_intervals_never_and_always(equator_flight):
    """Test a far-side satellite has no access and an overhead one has a single window"""
    assert access_intervals(_equatorial(180.0), equator_flight, VisibilityMask()) == []
    grid = equator_flight.grid()
    intervals = access_intervals(_equatorial(-12.0), equator_flight, VisibilityMask())
    assert intervals == [(float(grid[0]), float(grid[-1] + equator_flight.timestep_s))]


def test_access_interval_matches_dense_oracle(equator_flight):
    """Test a rising pass starts within one grid step of the 0.01 s crossing"""
    satellite = _equatorial(-30.0)
    mask = VisibilityMask()
    intervals = access_intervals(satellite, equator_flight, mask)
    assert len(intervals) == 1

    dense = np.arange(0.0, equator_flight.arrival_t_s, 0.01)
    visible, _, _ = satellite_visibility(satellite, equator_flight, mask, dense)
    crossing = dense[np.argmax(visible)]
    assert visible.any() and not visible[0]
    start, end = intervals[0]
    assert crossing <= start < crossing + equator_flight.timestep_s
    assert end == pytest.approx(equator_flight.grid()[-1] + equator_flight.timestep_s)


def test_interval_union_equals_visible_samples(equator_flight):
    """Test interval membership reproduces the visibility flags exactly"""
    satellite = _equatorial(-30.0)
    grid = equator_flight.grid()
    visible, _, _ = satellite_visibility(satellite, equator_flight, VisibilityMask(), grid)
    intervals = access_intervals(satellite, equator_flight, VisibilityMask(), grid)
    members = np.zeros(len(grid), dtype=bool)
    for start, end in intervals:
        members |= (grid >= start) & (grid < end)
    np.testing.assert_array_equal(members, visible)


def test_raising_mask_never_adds_samples(equator_flight):
    """Test visibility is monotone in the elevation mask"""
    satellite = _equatorial(-30.0)
    previous = None
    for elevation in (0.0, 5.0, 10.0, 20.0, 40.0):
        visible, _, _ = satellite_visibility(satellite, equator_flight, VisibilityMask(elevation, 90.0))
        if previous is not None:
            assert not np.any(visible & ~previous)
        previous = visible


def test_slant_range_bounded_by_altitude_difference():
    """Test slant range never undercuts the altitude difference"""
    rng = np.random.default_rng(3)
    observers = np.array([geodetic_to_ecef(Geodetic.from_degrees(lat, lon, 11_000.0))
                          for lat, lon in rng.uniform([-80, -180], [80, 180], size=(50, 2))])
    satellites = np.array([geodetic_to_ecef(Geodetic.from_degrees(lat, lon, 829_000.0))
                           for lat, lon in rng.uniform([-80, -180], [80, 180], size=(50, 2))])
    _, _, slant_range = visibility_series(observers, satellites, VisibilityMask())
    assert np.all(slant_range >= 818_000.0 - 1e-6)


def test_max_central_angle_without_beam_limit():
    """Test the elevation-only footprint at a 90 degree beam"""
    mask = VisibilityMask(min_elevation_deg=10.0, beam_half_angle_deg=90.0)
    r_o, r_s = R_EARTH + 11_000.0, 7.2e6
    elevation = math.radians(10.0)
    expected = math.acos(r_o * math.cos(elevation) / r_s) - elevation
    assert float(max_central_angle(r_o, r_s, mask)) == pytest.approx(expected)
