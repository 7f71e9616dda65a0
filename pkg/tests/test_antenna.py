#!/usr/bin/env python3
"""Test suite for array-factor gain and beam steering"""

import math

import numpy as np
import pytest

from src.cabin.antenna import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    array_factor_gain,
    cpe_array,
    fixed_beam_gain,
    steer_toward,
    ue_array,
)
from src.errors import ValidationError

FREQUENCY = 5.8e9


def _direction(theta_deg, phi_deg):
    theta, phi = math.radians(theta_deg), math.radians(phi_deg)
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def test_peak_gains():
    """Test 4x8 and four-element peaks"""
    broadside = [0.0, 0.0, 1.0]
    assert array_factor_gain(cpe_array(), broadside, broadside, FREQUENCY) == pytest.approx(15.05, abs=0.01)
    assert array_factor_gain(ue_array("2x2"), broadside, broadside, FREQUENCY) == pytest.approx(6.02, abs=0.01)
    assert array_factor_gain(ue_array("1x4"), broadside, broadside, FREQUENCY) == pytest.approx(6.02, abs=0.01)
    assert cpe_array().peak_gain_db == pytest.approx(10 * math.log10(32))


def test_single_element_is_isotropic():
    """Test a one-element array has 0 dB everywhere"""
    single = ArrayGeometry.ura(1, 1)
    queries = np.array([_direction(t, p) for t in range(0, 181, 30) for p in range(0, 360, 45)])
    np.testing.assert_allclose(array_factor_gain(single, [0, 0, 1], queries, FREQUENCY), 0.0, atol=1e-12)


def test_off_broadside_matches_phasor_sum():
    """Test a broadside-steered ULA 60 degrees off axis against a direct phasor sum"""
    ula = ArrayGeometry.ula(4)
    query = _direction(60.0, 0.0)
    phases = [math.pi * math.sin(math.radians(60.0)) * n for n in range(4)]
    power = abs(sum(complex(math.cos(p), math.sin(p)) for p in phases)) ** 2 / 4
    expected = 10 * math.log10(max(power, 1e-30))
    assert array_factor_gain(ula, [0, 0, 1], query, FREQUENCY) == pytest.approx(expected, abs=1e-6)


def test_endfire_matches_phasor_sum():
    """Test a broadside-steered half-wave ULA at endfire against a direct phasor sum"""
    ula = ArrayGeometry.ula(4)
    positions = ula.element_positions(FREQUENCY)[:, 0]
    wavenumber = 2 * math.pi * FREQUENCY / SPEED_OF_LIGHT
    power = abs(sum(complex(math.cos(wavenumber * x), math.sin(wavenumber * x)) for x in positions)) ** 2 / 4
    gain_db = array_factor_gain(ula, [0, 0, 1], [1, 0, 0], FREQUENCY)
    assert 10 ** (gain_db / 10) == pytest.approx(power, abs=1e-12)
    assert power < 1e-12


def test_steered_peak_location():
    """Test the 1-degree grid maximum sits at the steer direction"""
    steer = _direction(35.0, 60.0)
    gain = steer_toward(cpe_array(), steer, FREQUENCY)
    grid = [(t, p) for t in range(0, 91) for p in range(0, 360, 1)]
    queries = np.array([_direction(t, p) for t, p in grid])
    values = gain(queries)
    assert grid[int(np.argmax(values))] == (35, 60)
    assert values.max() == pytest.approx(cpe_array().peak_gain_db, abs=1e-9)


def test_ula_axial_symmetry():
    """Test a ULA pattern is symmetric about its axis"""
    ula = ArrayGeometry.ula(4)
    steer = _direction(30.0, 0.0)
    a = array_factor_gain(ula, steer, _direction(50.0, 40.0), FREQUENCY)
    # Mirroring y keeps the projection on the array axis
    query = _direction(50.0, 40.0)
    rotated = np.array([query[0], -query[1], query[2]])
    assert array_factor_gain(ula, steer, rotated, FREQUENCY) == pytest.approx(a, abs=1e-9)


def test_reciprocity():
    """Test swapping steer and query leaves the gain unchanged"""
    rng = np.random.default_rng(5)
    for _ in range(20):
        a, b = rng.normal(size=3), rng.normal(size=3)
        forward = array_factor_gain(cpe_array(), a, b, FREQUENCY)
        backward = array_factor_gain(cpe_array(), b, a, FREQUENCY)
        assert forward == pytest.approx(backward, abs=1e-9)


def test_geometry_validation():
    """Test degenerate arrays and layouts are rejected"""
    with pytest.raises(ValidationError):
        ArrayGeometry.ura(0, 4)
    with pytest.raises(ValidationError):
        ArrayGeometry(kind="ula", rows=2, cols=2)
    with pytest.raises(ValidationError):
        ue_array("3x3")
    with pytest.raises(ValidationError):
        array_factor_gain(cpe_array(), [0, 0, 1], [0, 0, 1], 0.0)


def test_fixed_beam_facing_ceiling_is_broadside_steering():
    """Test a ceiling-facing fixed beam equals the array steered at zenith"""
    queries = np.array([_direction(t, p) for t in range(0, 181, 20) for p in range(0, 360, 40)])
    for geom in (ue_array("2x2"), ue_array("1x4"), cpe_array()):
        np.testing.assert_allclose(fixed_beam_gain(geom, (0, 0, 1), queries, FREQUENCY),
                                   array_factor_gain(geom, [0, 0, 1], queries, FREQUENCY), atol=1e-9)


def test_fixed_beam_orientation():
    """Test a forward-facing array peaks along x and lays its rows across the cabin"""
    forward = (1.0, 0.0, 0.0)
    for layout in ("2x2", "1x4"):
        assert fixed_beam_gain(ue_array(layout), forward, [1, 0, 0], FREQUENCY) == pytest.approx(6.02, abs=0.01)
        assert fixed_beam_gain(ue_array(layout), forward, [-1, 0, 0], FREQUENCY) == pytest.approx(6.02, abs=0.01)
    # The linear array runs along y, so its broadside plane contains the vertical
    assert fixed_beam_gain(ue_array("1x4"), forward, [0, 0, 1], FREQUENCY) == pytest.approx(6.02, abs=0.01)
    assert fixed_beam_gain(ue_array("1x4"), forward, [0, 1, 0], FREQUENCY) < -100.0
    assert fixed_beam_gain(ue_array("2x2"), forward, [0, 0, 1], FREQUENCY) < -100.0
    assert fixed_beam_gain(ue_array("2x2"), (0, 0, 1), [1, 0, 0], FREQUENCY) < -100.0
