"""Serving-satellite timeline, handover events and coverage metrics"""

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from src.errors import ValidationError

NO_SATELLITE = -1


@dataclass(frozen=True)
class HandoverEvent:
    """Change of serving satellite, possibly across a service gap"""

    t_s: float
    from_sat: Optional[int]
    to_sat: Optional[int]
    gap_s: float = 0.0

    def __post_init__(self):
        if self.from_sat == self.to_sat:
            raise ValidationError(f"handover at {self.t_s} s does not change the serving satellite")

    @property
    def is_handover(self) -> bool:
        """True for satellite-to-satellite transfers, False for teardown/reacquisition"""
        return self.from_sat is not None and self.to_sat is not None

    def to_dict(self) -> dict:
        return {
            "t_s": self.t_s,
            "from_sat": "" if self.from_sat is None else self.from_sat,
            "to_sat": "" if self.to_sat is None else self.to_sat,
            "gap_s": self.gap_s,
        }


@dataclass
class CoverageTimeline:
    """Per-timestep serving satellite and its link geometry"""

    grid: np.ndarray
    serving: np.ndarray
    elevation_deg: np.ndarray
    slant_range_m: np.ndarray
    timestep_s: float

    def __post_init__(self):
        n = len(self.grid)
        if not (len(self.serving) == len(self.elevation_deg) == len(self.slant_range_m) == n):
            raise ValidationError("timeline arrays must share the grid length")

    def __len__(self) -> int:
        return len(self.grid)

    @property
    def covered(self) -> np.ndarray:
        return self.serving != NO_SATELLITE

    def serving_at(self, index: int) -> Optional[int]:
        value = int(self.serving[index])
        return None if value == NO_SATELLITE else value

    def rows(self) -> list[dict]:
        """CSV rows: t_s, serving_sat, elevation_deg, slant_range_m"""
        rows = []
        for k in range(len(self.grid)):
            sat = self.serving_at(k)
            rows.append({
                "t_s": _fmt(self.grid[k]),
                "serving_sat": "" if sat is None else sat,
                "elevation_deg": "" if sat is None else _fmt(self.elevation_deg[k]),
                "slant_range_m": "" if sat is None else _fmt(self.slant_range_m[k]),
            })
        return rows


def _fmt(value: float) -> str:
    return repr(float(value))


def select_serving(visible: Mapping[int, float], current: Optional[int]) -> Optional[int]:
    """Pick the serving satellite from the visible set

    Keeps the current satellite while it stays visible; otherwise takes the
    highest elevation, breaking ties by lowest id.

    Args:
        visible: Map of visible satellite id to elevation in degrees
        current: Currently serving satellite, if any

    Returns:
        Serving satellite id, or None when nothing is visible
    """
    if current is not None and current in visible:
        return current
    if not visible:
        return None
    return min(visible, key=lambda sat_id: (-visible[sat_id], sat_id))


def build_timeline(
    grid: np.ndarray,
    timestep_s: float,
    links: Mapping[int, tuple[np.ndarray, np.ndarray, np.ndarray]],
) -> CoverageTimeline:
    """Fold select_serving over the grid

    Args:
        grid: Sample times
        timestep_s: Grid spacing
        links: Map of satellite id to (visible, elevation_deg, slant_range_m) arrays

    Returns:
        CoverageTimeline with one serving decision per sample
    """
    n = len(grid)
    serving = np.full(n, NO_SATELLITE, dtype=np.int64)
    elevation = np.full(n, np.nan)
    slant_range = np.full(n, np.nan)
    ids = sorted(links)
    if ids:
        visible_matrix = np.stack([links[i][0] for i in ids])
        elevation_matrix = np.stack([links[i][1] for i in ids])
        range_matrix = np.stack([links[i][2] for i in ids])
        any_visible = visible_matrix.any(axis=0)
        current: Optional[int] = None
        for k in range(n):
            if not any_visible[k]:
                current = None
                continue
            column = visible_matrix[:, k]
            candidates = {ids[j]: float(elevation_matrix[j, k]) for j in np.flatnonzero(column)}
            current = select_serving(candidates, current)
            row = ids.index(current)
            serving[k] = current
            elevation[k] = elevation_matrix[row, k]
            slant_range[k] = range_matrix[row, k]
    return CoverageTimeline(grid=np.asarray(grid, dtype=float), serving=serving,
                            elevation_deg=elevation, slant_range_m=slant_range, timestep_s=timestep_s)


def extract_handovers(timeline: CoverageTimeline) -> list[HandoverEvent]:
    """Serving-satellite changes in time order

    A loss followed by a different satellite (A, none…, B) is one event from
    A to B carrying the gap. Reacquiring the same satellite after a gap is a
    teardown (A to none) plus a reacquisition (none to A) carrying the gap. A
    trailing loss is a teardown event; a leading gap yields no event.
    """
    events: list[HandoverEvent] = []
    last: Optional[int] = None
    lost_at: Optional[float] = None
    gap_samples = 0
    for k in range(len(timeline)):
        sat = timeline.serving_at(k)
        t = float(timeline.grid[k])
        if sat is None:
            if last is not None:
                if gap_samples == 0:
                    lost_at = t
                gap_samples += 1
            continue
        if last is None:
            last = sat
            continue
        gap_s = gap_samples * timeline.timestep_s
        if sat != last:
            events.append(HandoverEvent(t_s=t, from_sat=last, to_sat=sat, gap_s=gap_s))
        elif gap_samples:
            events.append(HandoverEvent(t_s=lost_at, from_sat=last, to_sat=None, gap_s=0.0))
            events.append(HandoverEvent(t_s=t, from_sat=None, to_sat=sat, gap_s=gap_s))
        last = sat
        gap_samples = 0
    if last is not None and gap_samples:
        events.append(HandoverEvent(t_s=lost_at, from_sat=last, to_sat=None, gap_s=0.0))
    return events


def coverage_percentage(timeline: CoverageTimeline) -> float:
    """Covered samples over total samples, percent to 0.01"""
    if len(timeline) == 0:
        return 0.0
    return float(np.round(100.0 * int(np.count_nonzero(timeline.covered)) / len(timeline), 2))


def cumulative_coverage(timeline: CoverageTimeline) -> np.ndarray:
    """Running coverage percentage; the last value equals coverage_percentage"""
    counts = np.cumsum(timeline.covered.astype(np.int64))
    return np.round(100.0 * counts / len(timeline), 2)


def gap_statistics(timeline: CoverageTimeline) -> tuple[float, float]:
    """(max_gap_s, total_gap_s) over gaps between the first and last covered samples"""
    covered = timeline.covered
    indices = np.flatnonzero(covered)
    if len(indices) == 0:
        return 0.0, 0.0
    inner = ~covered[indices[0]:indices[-1] + 1]
    flags = np.concatenate([[False], inner, [False]])
    edges = np.flatnonzero(np.diff(flags.astype(np.int8)))
    lengths = edges[1::2] - edges[0::2]
    if len(lengths) == 0:
        return 0.0, 0.0
    return float(lengths.max() * timeline.timestep_s), float(lengths.sum() * timeline.timestep_s)


def uncovered_time(timeline: CoverageTimeline) -> float:
    """Seconds without service, including before first contact and after last contact"""
    return float(np.count_nonzero(~timeline.covered) * timeline.timestep_s)
