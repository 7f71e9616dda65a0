"""Array-factor gain of uniform rectangular and linear arrays

Elements are isotropic and lossless. Conjugate-phase steering with uniform
amplitude puts the peak of |AF|²/N, which equals N, on the steer direction.
"""

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from src.errors import ValidationError

SPEED_OF_LIGHT = 299_792_458.0  # m/s
_GAIN_FLOOR = 1e-30


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform array laid out in the local x-y plane

    A URA has `rows` along y and `cols` along x; a ULA is a single row
    along x.
    """

    kind: Literal["ura", "ula"] = "ura"
    rows: int = 1
    cols: int = 1
    element_spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if self.kind not in ("ura", "ula"):
            raise ValidationError(f"unknown array kind '{self.kind}'", key="kind")
        if self.rows < 1 or self.cols < 1:
            raise ValidationError("array dimensions must be at least 1", key="rows")
        if self.kind == "ula" and self.rows != 1:
            raise ValidationError("a linear array has a single row", key="rows")
        if not self.element_spacing_wavelengths > 0:
            raise ValidationError("element spacing must be positive", key="element_spacing_wavelengths")

    @classmethod
    def ura(cls, rows: int, cols: int, spacing: float = 0.5) -> "ArrayGeometry":
        return cls(kind="ura", rows=rows, cols=cols, element_spacing_wavelengths=spacing)

    @classmethod
    def ula(cls, n: int, spacing: float = 0.5) -> "ArrayGeometry":
        return cls(kind="ula", rows=1, cols=n, element_spacing_wavelengths=spacing)

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols

    @property
    def peak_gain_db(self) -> float:
        return 10.0 * math.log10(self.n_elements)

    def element_positions(self, frequency_hz: float) -> np.ndarray:
        """Element coordinates in meters, centered on the array origin"""
        spacing = self.element_spacing_wavelengths * SPEED_OF_LIGHT / frequency_hz
        xs = (np.arange(self.cols) - (self.cols - 1) / 2.0) * spacing
        ys = (np.arange(self.rows) - (self.rows - 1) / 2.0) * spacing
        grid_x, grid_y = np.meshgrid(xs, ys)
        return np.stack([grid_x.ravel(), grid_y.ravel(), np.zeros(self.n_elements)], axis=-1)

    def describe(self) -> str:
        if self.kind == "ula":
            return f"ULA 1x{self.cols}"
        return f"URA {self.rows}x{self.cols}"


def _unit_rows(directions) -> np.ndarray:
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    norms = np.linalg.norm(directions, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise ValidationError("direction vectors must be non-zero")
    return directions / norms


def array_factor_gain(geom: ArrayGeometry, steer_dir, query_dir, frequency_hz: float):
    """Gain in dB of the steered array toward one or more query directions

    Args:
        geom: Array geometry
        steer_dir: Unit 3-vector the weights are phased toward
        query_dir: Unit 3-vector, or (M, 3) array of them
        frequency_hz: Carrier frequency

    Returns:
        Gain in dB (float for a single query, array for many)
    """
    if not frequency_hz > 0:
        raise ValidationError(f"frequency {frequency_hz} Hz must be positive")
    single = np.ndim(query_dir) == 1
    steer = _unit_rows(steer_dir)[0]
    queries = _unit_rows(query_dir)
    wavenumber = 2.0 * math.pi * frequency_hz / SPEED_OF_LIGHT
    positions = geom.element_positions(frequency_hz)
    phases = wavenumber * (queries - steer) @ positions.T
    factor = np.exp(1j * phases).sum(axis=-1)
    gain = np.abs(factor) ** 2 / geom.n_elements
    gain_db = 10.0 * np.log10(np.maximum(gain, _GAIN_FLOOR))
    return float(gain_db[0]) if single else gain_db


def _array_frame(boresight) -> np.ndarray:
    # Rows are the array's local x, local y and normal in cabin coordinates
    normal = _unit_rows(boresight)[0]
    if abs(normal[2]) > 1.0 - 1e-9:
        local_x = np.array([1.0, 0.0, 0.0])
    else:
        local_x = np.cross([0.0, 0.0, 1.0], normal)
        local_x /= np.linalg.norm(local_x)
    return np.stack([local_x, np.cross(normal, local_x), normal])


def fixed_beam_gain(geom: ArrayGeometry, boresight, query_dir, frequency_hz: float):
    """Gain in dB of an array whose weights stay phased toward its own boresight

    The array plane is perpendicular to `boresight`. A ceiling-facing array
    keeps its local axes on the cabin x and y axes; any other orientation
    puts local x on the horizontal axis perpendicular to the boresight.
    """
    single = np.ndim(query_dir) == 1
    local = _unit_rows(query_dir) @ _array_frame(boresight).T
    gain_db = array_factor_gain(geom, (0.0, 0.0, 1.0), local, frequency_hz)
    return float(gain_db[0]) if single else gain_db


@dataclass(frozen=True)
class SteeredGain:
    """Array with weights fixed toward one direction"""

    geometry: ArrayGeometry
    steer_direction: tuple[float, float, float]
    frequency_hz: float = 5.8e9

    def __call__(self, query_dir):
        return array_factor_gain(self.geometry, self.steer_direction, query_dir, self.frequency_hz)

    @property
    def peak_gain_db(self) -> float:
        return self.geometry.peak_gain_db


def steer_toward(geom: ArrayGeometry, direction, frequency_hz: float = 5.8e9) -> SteeredGain:
    """Ideal beam steering toward a unit direction"""
    unit = _unit_rows(direction)[0]
    return SteeredGain(geometry=geom, steer_direction=tuple(float(c) for c in unit), frequency_hz=frequency_hz)


def ue_array(layout: Literal["2x2", "1x4"] = "2x2") -> ArrayGeometry:
    """Four-element user-equipment array, planar 2x2 or linear 1x4"""
    if layout == "2x2":
        return ArrayGeometry.ura(2, 2)
    if layout == "1x4":
        return ArrayGeometry.ula(4)
    raise ValidationError(f"unknown UE array layout '{layout}'", key="ue_array")


def cpe_array() -> ArrayGeometry:
    """4x8 rectangular transmit array of the cabin access points"""
    return ArrayGeometry.ura(4, 8)
