"""Parametric cabin box and node layout"""

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from src.cabin.antenna import ArrayGeometry, array_factor_gain, cpe_array, fixed_beam_gain, ue_array
from src.errors import ValidationError

FACE_NAMES = ("x-", "x+", "y-", "y+", "z-", "z+")

# Array normals for nodes whose weights are fixed; None radiates isotropically
BORESIGHTS: dict[str, Optional[tuple[float, float, float]]] = {
    "isotropic": None,
    "ceiling": (0.0, 0.0, 1.0),
    "floor": (0.0, 0.0, -1.0),
    "forward": (1.0, 0.0, 0.0),
}


@dataclass(frozen=True)
class CabinGeometry:
    """Empty rectangular cabin with six planar metallic faces

    Faces are indexed 0..5 as x=0, x=L, y=0, y=W, z=0 (floor), z=H (ceiling).
    """

    length_m: float = 45.0
    width_m: float = 5.6
    height_m: float = 2.4
    reflection_loss_db: tuple[float, ...] = (1.0,) * 6

    def __post_init__(self):
        if min(self.length_m, self.width_m, self.height_m) <= 0:
            raise ValidationError("cabin dimensions must be positive", key="length_m")
        losses = self.reflection_loss_db
        if isinstance(losses, (int, float)):
            losses = (float(losses),) * 6
        losses = tuple(float(v) for v in losses)
        if len(losses) != 6:
            raise ValidationError("reflection loss needs one value per face", key="reflection_loss_db")
        if any(v < 0 for v in losses):
            raise ValidationError("reflection loss must be non-negative", key="reflection_loss_db")
        object.__setattr__(self, "reflection_loss_db", losses)

    @property
    def size(self) -> np.ndarray:
        return np.array([self.length_m, self.width_m, self.height_m])

    def contains(self, point) -> bool:
        """Strictly inside the box"""
        point = np.asarray(point, dtype=float)
        return bool(np.all(point > 0.0) and np.all(point < self.size))

    @staticmethod
    def face_axis(face: int) -> int:
        return face // 2

    def face_offset(self, face: int) -> float:
        return 0.0 if face % 2 == 0 else float(self.size[face // 2])

    def mirror(self, point: np.ndarray, face: int) -> np.ndarray:
        """Image of a point across a face plane"""
        image = np.array(point, dtype=float)
        axis = self.face_axis(face)
        image[axis] = 2.0 * self.face_offset(face) - image[axis]
        return image


@dataclass(frozen=True)
class CabinNode:
    """Antenna node placed inside the cabin

    A steerable node phases its array toward whichever direction the link
    asks for. Otherwise the array keeps broadside weights facing
    `boresight`, and a node without a boresight counts as isotropic.
    """

    id: int
    position_m: tuple[float, float, float]
    array: ArrayGeometry
    steerable: bool = True
    boresight: Optional[tuple[float, float, float]] = None

    @property
    def position(self) -> np.ndarray:
        return np.asarray(self.position_m, dtype=float)

    def gain_db(self, directions: np.ndarray, steer: np.ndarray, frequency_hz: float) -> np.ndarray:
        """Gain toward (M, 3) directions when the link wants the beam on `steer`"""
        directions = np.atleast_2d(directions)
        if self.steerable:
            return np.atleast_1d(array_factor_gain(self.array, steer, directions, frequency_hz))
        if self.boresight is not None:
            return np.atleast_1d(fixed_beam_gain(self.array, self.boresight, directions, frequency_hz))
        return np.zeros(len(directions))


@dataclass(frozen=True)
class TransmitterNode(CabinNode):
    array: ArrayGeometry = field(default_factory=cpe_array)


@dataclass(frozen=True)
class ReceiverNode(CabinNode):
    array: ArrayGeometry = field(default_factory=ue_array)
    steerable: bool = False


def default_transmitters(
    geometry: CabinGeometry,
    count: int = 4,
    ceiling_offset_m: float = 0.1,
) -> list[TransmitterNode]:
    """Ceiling-centerline access points at length fractions (2i+1)/(2·count)"""
    if count < 1:
        raise ValidationError("at least one transmitter is required", key="n_transmitters")
    z = geometry.height_m - ceiling_offset_m
    nodes = []
    for i in range(count):
        x = geometry.length_m * (2 * i + 1) / (2 * count)
        nodes.append(TransmitterNode(id=i, position_m=(x, geometry.width_m / 2.0, z)))
    _check_inside(geometry, nodes)
    return nodes


def default_receivers(
    geometry: CabinGeometry,
    rows: int = 20,
    columns: int = 2,
    seats_per_cell: int = 3,
    seat_height_m: float = 1.1,
    seat_pitch_m: float = 0.5,
    ue_layout: Literal["2x2", "1x4"] = "2x2",
    steerable: bool = False,
    boresight: Optional[tuple[float, float, float]] = None,
) -> list[ReceiverNode]:
    """Passenger seats: rows along the cabin, seat columns split by aisles

    Row r sits at x = (r + 0.5)·L/rows; column c is centered at
    y = (2c + 1)·W/(2·columns) with its seats spaced by seat_pitch_m.
    """
    array = ue_array(ue_layout)
    nodes = []
    for r in range(rows):
        x = (r + 0.5) * geometry.length_m / rows
        for c in range(columns):
            center = (2 * c + 1) * geometry.width_m / (2 * columns)
            for s in range(seats_per_cell):
                y = center + (s - (seats_per_cell - 1) / 2.0) * seat_pitch_m
                nodes.append(ReceiverNode(id=len(nodes), position_m=(x, y, seat_height_m),
                                          array=array, steerable=steerable, boresight=boresight))
    _check_inside(geometry, nodes)
    return nodes


def _check_inside(geometry: CabinGeometry, nodes):
    for node in nodes:
        if not geometry.contains(node.position):
            raise ValidationError(f"node {node.id} at {node.position_m} lies outside the cabin")
