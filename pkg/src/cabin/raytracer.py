"""Shooting-and-bouncing-rays propagation inside the cabin box

Rays leave each transmitter on a geodesic sphere, reflect specularly off the
box faces, and are captured by a receiver when they pass within a
distance-proportional reception sphere. Each captured face sequence is then
rebuilt exactly with the image method, so reported paths obey the mirror law
and carry exact lengths. Line of sight is always evaluated analytically.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.cabin.antenna import SPEED_OF_LIGHT
from src.cabin.geometry import (
    CabinGeometry,
    CabinNode,
    ReceiverNode,
    TransmitterNode,
    default_receivers,
    default_transmitters,
)
from src.errors import DomainError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_FREQUENCY_HZ = 5.8e9
_ICOSAHEDRON_EDGE_MEAN_DEG = math.degrees(math.sqrt(16.0 * math.pi / (20.0 * math.sqrt(3.0))))
_RAY_CHUNK = 2048
_BOUNDS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class RaySet:
    """Launched ray directions from one transmitter"""

    tx_id: int
    origin: np.ndarray
    directions: np.ndarray
    angular_separation_deg: float

    @property
    def count(self) -> int:
        return len(self.directions)


@dataclass(frozen=True)
class RayPath:
    """One specular propagation path from transmitter to receiver"""

    tx_id: int
    rx_id: int
    vertices: tuple[tuple[float, float, float], ...]
    faces: tuple[int, ...]
    total_length_m: float
    departure: tuple[float, float, float]
    arrival: tuple[float, float, float]
    reflection_loss_db: float = 0.0
    path_loss_db: float = float("nan")

    @property
    def n_reflections(self) -> int:
        return len(self.faces)

    @property
    def sort_key(self) -> tuple:
        return (len(self.faces), self.faces, self.total_length_m)


@dataclass(frozen=True)
class CabinScenario:
    """Cabin geometry, node layout and propagation parameters"""

    geometry: CabinGeometry = field(default_factory=CabinGeometry)
    transmitters: tuple[TransmitterNode, ...] = ()
    receivers: tuple[ReceiverNode, ...] = ()
    frequency_hz: float = DEFAULT_FREQUENCY_HZ
    angular_separation_deg: float = 1.0
    max_reflections: int = 2
    capture_scale: float = 1.0

    def __post_init__(self):
        if not self.frequency_hz > 0:
            raise ValidationError("frequency must be positive", key="frequency_hz")
        if not 0 < self.angular_separation_deg <= 10:
            raise ValidationError("angular separation must lie in (0, 10] degrees", key="angular_separation_deg")
        if self.max_reflections < 0:
            raise ValidationError("max_reflections must be non-negative", key="max_reflections")
        if not self.capture_scale > 0:
            raise ValidationError("capture scale must be positive", key="capture_scale")
        for node in (*self.transmitters, *self.receivers):
            if not self.geometry.contains(node.position):
                raise ValidationError(f"node {node.id} at {node.position_m} lies outside the cabin")

    @classmethod
    def default(cls, geometry: Optional[CabinGeometry] = None, **kwargs) -> "CabinScenario":
        """Four ceiling transmitters and 120 seats"""
        geometry = geometry or CabinGeometry()
        return cls(
            geometry=geometry,
            transmitters=tuple(default_transmitters(geometry)),
            receivers=tuple(default_receivers(geometry)),
            **kwargs,
        )


@lru_cache(maxsize=16)
def _geodesic_directions(frequency: int) -> np.ndarray:
    # Frequency-f subdivision of the icosahedron: 10·f² + 2 unit vectors
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    vertices = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=float)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    points = [vertices]
    edges = sorted({tuple(sorted(pair)) for a, b, c in faces for pair in ((a, b), (b, c), (c, a))})
    steps = np.arange(1, frequency)[:, np.newaxis]
    for a, b in edges:
        points.append(((frequency - steps) * vertices[a] + steps * vertices[b]) / frequency)
    for a, b, c in faces:
        interior = [(i, j, frequency - i - j) for i in range(1, frequency)
                    for j in range(1, frequency - i) if frequency - i - j >= 1]
        if interior:
            weights = np.array(interior, dtype=float)
            points.append((weights @ vertices[[a, b, c]]) / frequency)
    directions = np.concatenate(points)
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    directions.setflags(write=False)
    return directions


def geodesic_frequency(angular_sep_deg: float) -> int:
    """Subdivision frequency whose mean neighbor spacing is at most angular_sep_deg"""
    return max(1, math.ceil(_ICOSAHEDRON_EDGE_MEAN_DEG / angular_sep_deg - 1e-12))


def launch_rays(tx: CabinNode, angular_sep_deg: float = 1.0) -> RaySet:
    """Deterministic launch directions from a geodesic sphere

    Args:
        tx: Transmitting node
        angular_sep_deg: Mean angular spacing between neighboring rays, (0, 10]

    Returns:
        RaySet whose directions are identical across runs
    """
    if not 0 < angular_sep_deg <= 10:
        raise ValidationError(f"angular separation {angular_sep_deg} must lie in (0, 10] degrees")
    directions = _geodesic_directions(geodesic_frequency(angular_sep_deg))
    return RaySet(tx_id=tx.id, origin=tx.position, directions=directions, angular_separation_deg=angular_sep_deg)


def fspl_db(distance_m: float, frequency_hz: float) -> float:
    """Free-space path loss 20·log10(4π·d·f/c)"""
    if distance_m <= 0 or frequency_hz <= 0:
        raise DomainError("distance and frequency must be positive")
    return 20.0 * math.log10(4.0 * math.pi * distance_m * frequency_hz / SPEED_OF_LIGHT)


def path_loss(
    path: RayPath,
    frequency_hz: float = DEFAULT_FREQUENCY_HZ,
    tx_gain_db: float = 0.0,
    rx_gain_db: float = 0.0,
) -> float:
    """Free-space loss plus reflection losses minus antenna gains, dB

    Raises:
        DomainError: if the path has zero length
    """
    if not path.total_length_m > 0:
        raise DomainError(f"path length {path.total_length_m} m must be positive")
    return fspl_db(path.total_length_m, frequency_hz) + path.reflection_loss_db - tx_gain_db - rx_gain_db


def _unit_tuple(vector: np.ndarray) -> tuple[float, float, float]:
    unit = vector / np.linalg.norm(vector)
    return (float(unit[0]), float(unit[1]), float(unit[2]))


def image_path(
    geometry: CabinGeometry,
    source,
    target,
    faces: Sequence[int],
    tx_id: int = 0,
    rx_id: int = 0,
) -> Optional[RayPath]:
    """Exact specular path for a face sequence, or None if it does not exist"""
    source = np.asarray(source, dtype=float)
    target = np.asarray(target, dtype=float)
    images = [source]
    for face in faces:
        images.append(geometry.mirror(images[-1], face))

    size = geometry.size
    point = target
    reflections = []
    for k in range(len(faces) - 1, -1, -1):
        face = faces[k]
        axis = geometry.face_axis(face)
        plane = geometry.face_offset(face)
        image = images[k + 1]
        denominator = point[axis] - image[axis]
        if abs(denominator) < 1e-15:
            return None
        u = (plane - image[axis]) / denominator
        if not 0.0 < u < 1.0:
            return None
        hit = image + u * (point - image)
        hit[axis] = plane
        if np.any(hit < -_BOUNDS_TOLERANCE) or np.any(hit > size + _BOUNDS_TOLERANCE):
            return None
        reflections.append(hit)
        point = hit
    reflections.reverse()

    vertices = [source, *reflections, target]
    length = float(np.linalg.norm(images[-1] - target))
    if not length > 0:
        return None
    return RayPath(
        tx_id=tx_id,
        rx_id=rx_id,
        vertices=tuple(tuple(float(c) for c in v) for v in vertices),
        faces=tuple(int(f) for f in faces),
        total_length_m=length,
        departure=_unit_tuple(vertices[1] - vertices[0]),
        arrival=_unit_tuple(vertices[-1] - vertices[-2]),
        reflection_loss_db=float(sum(geometry.reflection_loss_db[f] for f in faces)),
    )


def face_sequences(max_reflections: int):
    """All face sequences without immediate repeats, shortest first"""
    yield ()
    for order in range(1, max_reflections + 1):
        for sequence in itertools.product(range(6), repeat=order):
            if all(a != b for a, b in zip(sequence, sequence[1:])):
                yield sequence


def image_paths(
    geometry: CabinGeometry,
    source,
    target,
    max_reflections: int = 2,
    tx_id: int = 0,
    rx_id: int = 0,
) -> list[RayPath]:
    """Image-method enumeration of every specular path up to max_reflections"""
    paths = []
    for sequence in face_sequences(max_reflections):
        path = image_path(geometry, source, target, sequence, tx_id=tx_id, rx_id=rx_id)
        if path is not None:
            paths.append(path)
    return sorted(paths, key=lambda p: p.sort_key)


def _box_hits(geometry: CabinGeometry, origins: np.ndarray, directions: np.ndarray):
    size = geometry.size
    with np.errstate(divide="ignore", invalid="ignore"):
        distances = np.where(directions > 0, (size - origins) / directions,
                             np.where(directions < 0, -origins / directions, np.inf))
    axis = np.argmin(distances, axis=1)
    rows = np.arange(len(origins))
    t_hit = np.maximum(distances[rows, axis], 0.0)
    face = 2 * axis + (directions[rows, axis] > 0)
    return t_hit, face, axis


def _capture_keys(
    geometry: CabinGeometry,
    rays: RaySet,
    receivers: np.ndarray,
    max_reflections: int,
    capture_scale: float,
) -> set[tuple[int, tuple[int, ...]]]:
    # (receiver index, face sequence) pairs reached by at least one ray
    spread = 2.0 * math.tan(math.radians(rays.angular_separation_deg) / 2.0) * capture_scale
    keys: set[tuple[int, tuple[int, ...]]] = set()
    for begin in range(0, rays.count, _RAY_CHUNK):
        directions = np.array(rays.directions[begin:begin + _RAY_CHUNK])
        origins = np.broadcast_to(rays.origin, directions.shape).copy()
        travelled = np.zeros(len(directions))
        history = np.empty((len(directions), 0), dtype=np.int64)
        for bounce in range(max_reflections + 1):
            t_hit, face, axis = _box_hits(geometry, origins, directions)
            if bounce > 0:
                offsets = receivers[np.newaxis, :, :] - origins[:, np.newaxis, :]
                along = np.clip(np.einsum("nrk,nk->nr", offsets, directions), 0.0, t_hit[:, np.newaxis])
                miss = offsets - along[:, :, np.newaxis] * directions[:, np.newaxis, :]
                distance = np.linalg.norm(miss, axis=-1)
                radius = (travelled[:, np.newaxis] + along) * spread
                ray_index, rx_index = np.nonzero(distance <= radius)
                if len(ray_index):
                    sequences = history[ray_index]
                    for rx, sequence in set(zip(rx_index.tolist(), map(tuple, sequences.tolist()))):
                        keys.add((rx, sequence))
            if bounce == max_reflections:
                break
            origins = origins + t_hit[:, np.newaxis] * directions
            rows = np.arange(len(directions))
            origins[rows, axis] = np.where(face % 2 == 0, 0.0, geometry.size[axis])
            directions = directions.copy()
            directions[rows, axis] = -directions[rows, axis]
            travelled = travelled + t_hit
            history = np.concatenate([history, face[:, np.newaxis]], axis=1)
    return keys


class CabinRayTracer:
    """Traces every transmitter of a cabin scenario"""

    def __init__(self, scenario: CabinScenario, threads: int = 1, progress: bool = True):
        """
        Args:
            scenario: Cabin geometry, nodes and SBR parameters
            threads: Worker threads, one transmitter per task; never changes results
            progress: Show a tqdm progress bar over transmitters
        """
        self.scenario = scenario
        self.threads = max(1, threads)
        self.progress = progress

    def trace_transmitter(self, tx: TransmitterNode) -> dict[tuple[int, int], list[RayPath]]:
        scenario = self.scenario
        geometry = scenario.geometry
        rays = launch_rays(tx, scenario.angular_separation_deg)
        receiver_positions = np.array([rx.position for rx in scenario.receivers])
        keys = _capture_keys(geometry, rays, receiver_positions, scenario.max_reflections,
                             scenario.capture_scale)
        links: dict[tuple[int, int], list[RayPath]] = {}
        for index, rx in enumerate(scenario.receivers):
            los = image_path(geometry, tx.position, rx.position, (), tx_id=tx.id, rx_id=rx.id)
            links[(tx.id, rx.id)] = [los] if los is not None else []
        for rx_index, sequence in sorted(keys):
            rx = scenario.receivers[rx_index]
            path = image_path(geometry, tx.position, rx.position, sequence, tx_id=tx.id, rx_id=rx.id)
            if path is not None:
                links[(tx.id, rx.id)].append(path)
        for key in links:
            links[key].sort(key=lambda p: p.sort_key)
        logger.debug(f"Transmitter {tx.id}: {rays.count} rays, {sum(map(len, links.values()))} paths")
        return links

    def trace(self) -> dict[tuple[int, int], list[RayPath]]:
        """Paths for every (transmitter, receiver) pair, deterministically ordered"""
        logger.info(
            f"Tracing {len(self.scenario.transmitters)} transmitters x "
            f"{len(self.scenario.receivers)} receivers "
            f"({self.scenario.angular_separation_deg} deg, {self.scenario.max_reflections} reflections)"
        )
        start_time = datetime.now()
        transmitters = list(self.scenario.transmitters)
        results: list[dict] = []
        with tqdm(total=len(transmitters), desc="Tracing transmitters", unit="tx",
                  disable=not self.progress) as pbar:
            if self.threads > 1:
                with ThreadPoolExecutor(max_workers=self.threads) as pool:
                    for links in pool.map(self.trace_transmitter, transmitters):
                        results.append(links)
                        pbar.update(1)
                        pbar.set_postfix({"paths": sum(len(p) for r in results for p in r.values())})
            else:
                for tx in transmitters:
                    results.append(self.trace_transmitter(tx))
                    pbar.update(1)
                    pbar.set_postfix({"paths": sum(len(p) for r in results for p in r.values())})
        merged: dict[tuple[int, int], list[RayPath]] = {}
        for links in results:
            merged.update(links)
        elapsed = (datetime.now() - start_time).total_seconds()
        logger.info(f"Tracing complete: {sum(map(len, merged.values()))} paths ({elapsed:.1f}s)")
        return dict(sorted(merged.items()))


def trace(
    scenario: CabinScenario,
    max_reflections: Optional[int] = None,
    capture_scale: Optional[float] = None,
    threads: int = 1,
) -> dict[tuple[int, int], list[RayPath]]:
    """Functional entry point: SBR paths per (tx_id, rx_id)"""
    overrides = {}
    if max_reflections is not None:
        overrides["max_reflections"] = max_reflections
    if capture_scale is not None:
        overrides["capture_scale"] = capture_scale
    if overrides:
        scenario = CabinScenario(
            geometry=scenario.geometry,
            transmitters=scenario.transmitters,
            receivers=scenario.receivers,
            frequency_hz=scenario.frequency_hz,
            angular_separation_deg=scenario.angular_separation_deg,
            max_reflections=overrides.get("max_reflections", scenario.max_reflections),
            capture_scale=overrides.get("capture_scale", scenario.capture_scale),
        )
    return CabinRayTracer(scenario, threads=threads, progress=False).trace()


@dataclass(frozen=True)
class LinkLoss:
    best_loss_db: float
    combined_loss_db: float
    n_paths: int


@dataclass
class PathLossMatrix:
    """Per-link loss table behind the boxplot statistics"""

    entries: dict[tuple[int, int], LinkLoss]

    @property
    def tx_ids(self) -> list[int]:
        return sorted({tx for tx, _ in self.entries})

    def losses(self, tx_id: int, kind: str = "best") -> np.ndarray:
        attribute = "best_loss_db" if kind == "best" else "combined_loss_db"
        return np.array([getattr(v, attribute) for (tx, _), v in sorted(self.entries.items()) if tx == tx_id])

    def rows(self) -> list[dict]:
        return [
            {"tx_id": tx, "rx_id": rx, "best_loss_db": repr(v.best_loss_db),
             "combined_loss_db": repr(v.combined_loss_db), "n_paths": v.n_paths}
            for (tx, rx), v in sorted(self.entries.items())
        ]


def score_paths(
    scenario: CabinScenario,
    links: dict[tuple[int, int], list[RayPath]],
) -> tuple[PathLossMatrix, dict[tuple[int, int], list[RayPath]]]:
    """Apply per-link ideal steering and build the path-loss matrix

    Each steerable node points its beam along the link's strongest geometric
    path; every other path of the link is weighted by that same beam.
    Fixed-beam nodes weight every path by their own pattern, so the
    reported best loss is the lowest loss after gains.

    Returns:
        Tuple of (matrix, paths with path_loss_db filled in)
    """
    transmitters = {tx.id: tx for tx in scenario.transmitters}
    receivers = {rx.id: rx for rx in scenario.receivers}
    entries: dict[tuple[int, int], LinkLoss] = {}
    scored: dict[tuple[int, int], list[RayPath]] = {}
    for (tx_id, rx_id), paths in sorted(links.items()):
        if not paths:
            entries[(tx_id, rx_id)] = LinkLoss(math.inf, math.inf, 0)
            scored[(tx_id, rx_id)] = []
            continue
        geometric = np.array([path_loss(p, scenario.frequency_hz) for p in paths])
        best = int(np.argmin(geometric))
        departures = np.array([p.departure for p in paths])
        arrivals = -np.array([p.arrival for p in paths])
        tx_gain = transmitters[tx_id].gain_db(departures, departures[best], scenario.frequency_hz)
        rx_gain = receivers[rx_id].gain_db(arrivals, arrivals[best], scenario.frequency_hz)
        total = geometric - tx_gain - rx_gain
        combined = -10.0 * math.log10(float(np.sum(10.0 ** (-total / 10.0))))
        strongest = float(total.min())
        entries[(tx_id, rx_id)] = LinkLoss(strongest, min(combined, strongest), len(paths))
        scored[(tx_id, rx_id)] = [
            replace(p, path_loss_db=float(loss)) for p, loss in zip(paths, total)
        ]
    return PathLossMatrix(entries=entries), scored
