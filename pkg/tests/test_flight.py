#!/usr/bin/env python3
"""Test suite for great-circle flight tracks"""

import math

import numpy as np
import pytest

from src.errors import ConfigError, OutOfRangeError, ValidationError
from src.flight import (
    FlightPlan,
    TrackReplay,
    central_angle,
    great_circle_distance,
    load_flight_plan,
    load_track,
    position_at,
)
from src.orbital import R_EARTH, Geodetic

JFK = Geodetic.from_degrees(40.64, -73.78, 11_000.0)
SDQ = Geodetic.from_degrees(18.43, -69.67, 11_000.0)


@pytest.fixture
def ny_sd_plan():
    """JFK to SDQ at the default cruise settings"""
    return FlightPlan(origin=JFK, destination=SDQ)


@pytest.fixture
def equator_plan():
    """Short eastbound equatorial route"""
    return FlightPlan(origin=Geodetic.from_degrees(0.0, 0.0), destination=Geodetic.from_degrees(0.0, 10.0))


def test_great_circle_distance_examples():
    """Test identical, antipodal and JFK-SDQ distances"""
    assert great_circle_distance(JFK, JFK) == 0.0
    east = Geodetic.from_degrees(0.0, 0.0)
    west = Geodetic.from_degrees(0.0, 180.0)
    assert great_circle_distance(east, west) == pytest.approx(math.pi * R_EARTH)
    assert great_circle_distance(JFK, SDQ) == pytest.approx(2.50e6, abs=1e4)


def test_position_at_endpoints(ny_sd_plan):
    """Test departure and arrival reproduce the endpoints"""
    start = ny_sd_plan.position_at(ny_sd_plan.departure_t_s)
    end = ny_sd_plan.position_at(ny_sd_plan.arrival_t_s)
    assert central_angle(start.geodetic, JFK) < 1e-9
    assert central_angle(end.geodetic, SDQ) < 1e-9
    assert start.geodetic.alt_m == pytest.approx(11_000.0, abs=1e-6)


def test_position_at_midpoint(equator_plan):
    """Test the midpoint of an equatorial route"""
    middle = position_at(equator_plan, equator_plan.arrival_t_s / 2.0)
    assert middle.geodetic.lat_deg == pytest.approx(0.0, abs=1e-9)
    assert middle.geodetic.lon_deg == pytest.approx(5.0, abs=1e-9)


def test_position_outside_window(ny_sd_plan):
    """Test times outside the flight window raise"""
    with pytest.raises(OutOfRangeError):
        ny_sd_plan.position_at(-10.0)
    with pytest.raises(OutOfRangeError):
        ny_sd_plan.position_at(ny_sd_plan.arrival_t_s + 10.0)


def test_monotone_progress(ny_sd_plan):
    """Test distance from origin grows with time"""
    grid = ny_sd_plan.grid()
    track = ny_sd_plan.ecef_track(grid[::60])
    origin = track[0] / np.linalg.norm(track[0])
    angles = np.arccos(np.clip(track @ origin / np.linalg.norm(track, axis=1), -1.0, 1.0))
    assert np.all(np.diff(angles) > 0)


def test_path_length_matches_distance(ny_sd_plan):
    """Test summed step lengths match the great-circle distance"""
    times = np.append(ny_sd_plan.grid(), ny_sd_plan.arrival_t_s)
    track = ny_sd_plan.ecef_track(times)
    travelled = np.sum(np.linalg.norm(np.diff(track, axis=0), axis=1))
    assert travelled == pytest.approx(ny_sd_plan.distance_m, rel=1e-3)


def test_grid_half_open(ny_sd_plan):
    """Test the grid has ceil(duration / dt) samples"""
    grid = ny_sd_plan.grid()
    assert len(grid) == math.ceil(ny_sd_plan.duration_s)
    assert grid[0] == ny_sd_plan.departure_t_s
    assert grid[-1] < ny_sd_plan.arrival_t_s


def test_plan_validation():
    """Test zero speed and coincident endpoints are rejected"""
    with pytest.raises(ValidationError):
        FlightPlan(origin=JFK, destination=SDQ, ground_speed_mps=0.0)
    with pytest.raises(ValidationError):
        FlightPlan(origin=JFK, destination=JFK)
    with pytest.raises(ValidationError):
        FlightPlan(origin=JFK, destination=SDQ, timestep_s=0.0)


def test_load_flight_plan_toml(tmp_path):
    """Test a well-formed [flight] section loads"""
    path = tmp_path / "flight.toml"
    path.write_text(
        "[flight]\n"
        "origin_lat_deg = 40.64\norigin_lon_deg = -73.78\n"
        "destination_lat_deg = 18.43\ndestination_lon_deg = -69.67\n"
    )
    plan = load_flight_plan(path)
    assert isinstance(plan, FlightPlan)
    assert plan.ground_speed_mps == 250.0


def test_load_flight_plan_errors(tmp_path):
    """Test missing files, unknown keys and bad values"""
    with pytest.raises(ConfigError):
        load_flight_plan(tmp_path / "missing.toml")

    unknown = tmp_path / "unknown.toml"
    unknown.write_text("[flight]\norigin_lat_deg = 1.0\nwind_mps = 3.0\n")
    with pytest.raises(ConfigError) as error:
        load_flight_plan(unknown)
    assert error.value.key == "wind_mps"

    stopped = tmp_path / "stopped.toml"
    stopped.write_text(
        "[flight]\norigin_lat_deg = 0.0\norigin_lon_deg = 0.0\n"
        "destination_lat_deg = 0.0\ndestination_lon_deg = 5.0\nground_speed_mps = 0.0\n"
    )
    with pytest.raises(ValidationError):
        load_flight_plan(stopped)


def test_track_replay(tmp_path):
    """Test a CSV track interpolates between samples"""
    path = tmp_path / "track.csv"
    path.write_text("t_s,lat_deg,lon_deg,alt_m\n0,0,0,10000\n100,0,2,10000\n200,0,4,12000\n")
    track = load_track(path)
    assert isinstance(track, TrackReplay)
    assert len(track.grid()) == 200
    middle = track.position_at(150.0)
    assert middle.geodetic.lon_deg == pytest.approx(3.0, abs=1e-9)
    assert middle.geodetic.alt_m == pytest.approx(11_000.0, abs=1e-6)


def test_track_replay_rejects_bad_header(tmp_path):
    """Test the CSV header is checked"""
    path = tmp_path / "track.csv"
    path.write_text("time,lat,lon,alt\n0,0,0,0\n")
    with pytest.raises(ConfigError):
        load_track(path)
