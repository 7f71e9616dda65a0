"""Constellation manager for sequential satellite insertion and handover"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.constellation.search import (
    CoverageState,
    ElementSearch,
    ElementTemplate,
    InsertionPolicy,
    initial_satellite,
    next_satellite,
)
from src.constellation.timeline import (
    CoverageTimeline,
    HandoverEvent,
    build_timeline,
    coverage_percentage,
    extract_handovers,
    gap_statistics,
    uncovered_time,
)
from src.errors import UnreachableRouteError, ValidationError
from src.flight import FlightPath
from src.orbital.elements import KeplerianElements
from src.visibility import VisibilityMask, satellite_visibility

logger = logging.getLogger(__name__)
discarded_logger = logging.getLogger("skybridge.discarded")


class SatelliteStatus(str, Enum):
    PENDING = "pending"
    ACTIVE = "active"
    DISCARDED = "discarded"


@dataclass
class Satellite:
    """One satellite of the simulated constellation"""

    id: int
    elements: KeplerianElements
    inserted_t_s: float
    status: SatelliteStatus = SatelliteStatus.PENDING
    first_contact_t_s: Optional[float] = None

    def activate(self, t_s: float):
        if self.status is not SatelliteStatus.PENDING:
            raise ValidationError(f"satellite {self.id} is {self.status.value}, cannot activate")
        self.status = SatelliteStatus.ACTIVE
        self.first_contact_t_s = t_s

    def discard(self):
        if self.status is not SatelliteStatus.PENDING:
            raise ValidationError(f"satellite {self.id} is {self.status.value}, cannot discard")
        self.status = SatelliteStatus.DISCARDED

    def to_dict(self) -> dict:
        elements = self.elements.to_dict()
        return {
            "sat_id": self.id,
            "status": self.status.value,
            "inserted_t_s": self.inserted_t_s,
            "first_contact_t_s": "" if self.first_contact_t_s is None else self.first_contact_t_s,
            "raan_deg": elements["raan_deg"],
            "true_anomaly_deg": elements["true_anomaly_deg"],
            "sma_m": elements["sma_m"],
            "eccentricity": elements["eccentricity"],
            "inclination_deg": elements["inclination_deg"],
            "arg_periapsis_deg": elements["arg_periapsis_deg"],
        }


@dataclass
class CoverageRun:
    """Outcome of one coverage simulation"""

    satellites: list[Satellite]
    timeline: CoverageTimeline
    events: list[HandoverEvent] = field(default_factory=list)
    budget_exhausted: bool = False

    @property
    def summary(self) -> dict:
        max_gap, total_gap = gap_statistics(self.timeline)
        return {
            "coverage_pct": coverage_percentage(self.timeline),
            "n_satellites_active": sum(s.status is SatelliteStatus.ACTIVE for s in self.satellites),
            "n_satellites_discarded": sum(s.status is SatelliteStatus.DISCARDED for s in self.satellites),
            "n_handovers": sum(e.is_handover for e in self.events),
            "max_gap_s": max_gap,
            "total_gap_s": total_gap,
            "uncovered_s": uncovered_time(self.timeline),
        }


def density_policy(name: str, template: Optional[ElementTemplate] = None) -> InsertionPolicy:
    """Deployment presets: minimal, standard or dense"""
    presets = {"minimal": 1, "standard": 10, "dense": 40}
    if name not in presets:
        raise ValidationError(f"unknown density preset '{name}'", key="preset")
    return InsertionPolicy(max_satellites=presets[name], template=template or ElementTemplate())


class ConstellationManager:
    """Runs the insertion heuristic and folds visibility into a serving timeline"""

    def __init__(
        self,
        flight: FlightPath,
        policy: Optional[InsertionPolicy] = None,
        mask: Optional[VisibilityMask] = None,
        threads: int = 1,
        progress: bool = True,
    ):
        """Initialize manager for one flight

        Args:
            flight: Flight path providing the time grid and aircraft positions
            policy: Insertion policy (defaults to the dense preset)
            mask: Visibility mask (10° elevation, 60° beam by default)
            threads: Worker threads for visibility evaluation; never changes results
            progress: Show tqdm progress bars
        """
        self.flight = flight
        self.policy = policy or InsertionPolicy()
        self.mask = mask or VisibilityMask()
        self.threads = max(1, threads)
        self.progress = progress
        self.grid = flight.grid()

    def _links(self, satellite: Satellite) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        visible, elevation, slant_range = satellite_visibility(satellite.elements, self.flight, self.mask, self.grid)
        # A satellite serves only from its insertion time onwards
        visible = visible & (self.grid >= satellite.inserted_t_s)
        return visible, elevation, slant_range

    def _first_contact(self, visible: np.ndarray, inserted_t_s: float, deadline_t_s: float) -> Optional[float]:
        window = (self.grid >= inserted_t_s) & (self.grid <= deadline_t_s) & visible
        indices = np.flatnonzero(window)
        return None if len(indices) == 0 else float(self.grid[indices[0]])

    def _resolve(self, satellite: Satellite, visible: np.ndarray, timeout_s: float) -> bool:
        contact = self._first_contact(visible, satellite.inserted_t_s, satellite.inserted_t_s + timeout_s)
        if contact is None:
            satellite.discard()
            discarded_logger.info(
                f"Satellite {satellite.id} discarded: no contact within {timeout_s:.0f} s of "
                f"insertion at t={satellite.inserted_t_s:.1f} s "
                f"(RAAN {satellite.elements.to_dict()['raan_deg']:.1f} deg, "
                f"anomaly {satellite.elements.to_dict()['true_anomaly_deg']:.1f} deg)"
            )
            return False
        satellite.activate(contact)
        return True

    def _finish(self, satellites: list[Satellite], links: dict, budget_exhausted: bool) -> CoverageRun:
        active = {s.id: links[s.id] for s in satellites if s.status is SatelliteStatus.ACTIVE}
        timeline = build_timeline(self.grid, self.flight.timestep_s, active)
        run = CoverageRun(satellites=satellites, timeline=timeline,
                          events=extract_handovers(timeline), budget_exhausted=budget_exhausted)
        return run

    def run_sequential_insertion(self) -> CoverageRun:
        """Run the sequential insertion heuristic

        Workflow:
        1. Find the first uncovered sample after the cursor (t_gap)
        2. Stop if the flight is covered or the satellite budget is spent
        3. Grid-search elements for the gap and insert a Pending satellite at t_gap
        4. Activate it on first contact within the timeout, else discard it and
           move the cursor past the timeout window
        5. Fold Active satellites into the serving timeline

        Returns:
            CoverageRun with satellites, timeline and handover events
        """
        logger.info("Starting sequential satellite insertion")
        start_time = datetime.now()

        search = ElementSearch(self.flight, self.policy, self.mask, threads=self.threads)
        state = CoverageState(flight=self.flight, covered=np.zeros(len(self.grid), dtype=bool))
        satellites: list[Satellite] = []
        links: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        budget_exhausted = False

        with tqdm(total=self.policy.max_satellites, desc="Inserting satellites", unit="sat",
                  disable=not self.progress) as pbar:
            while True:
                gap = state.first_gap()
                if gap is None:
                    logger.info("Flight fully covered")
                    break
                if len(satellites) >= self.policy.max_satellites:
                    budget_exhausted = True
                    logger.info(f"Satellite budget of {self.policy.max_satellites} exhausted")
                    break

                t_gap = float(self.grid[gap])
                try:
                    if satellites:
                        elements = next_satellite(state, self.policy, self.mask, search=search)
                    else:
                        elements = initial_satellite(self.flight, self.policy, self.mask, search=search)
                except UnreachableRouteError:
                    if not satellites:
                        raise
                    logger.warning(f"No template cell sees the route after t={t_gap:.1f} s; stopping")
                    break

                satellite = Satellite(id=len(satellites), elements=elements, inserted_t_s=t_gap)
                satellites.append(satellite)
                links[satellite.id] = self._links(satellite)
                if self._resolve(satellite, links[satellite.id][0], self.policy.connect_timeout_s):
                    state.covered |= links[satellite.id][0]
                    if satellite.first_contact_t_s > t_gap:
                        # No cell could see t_gap itself; leave those samples as a gap
                        state.cursor = int(np.searchsorted(self.grid, satellite.first_contact_t_s, side="left"))
                else:
                    deadline = t_gap + self.policy.connect_timeout_s
                    state.cursor = int(np.searchsorted(self.grid, deadline, side="right"))

                pbar.update(1)
                pbar.set_postfix({
                    "covered": f"{100.0 * state.covered.mean():.1f}%",
                    "discarded": sum(s.status is SatelliteStatus.DISCARDED for s in satellites),
                })

        run = self._finish(satellites, links, budget_exhausted)
        elapsed = (datetime.now() - start_time).total_seconds()
        summary = run.summary
        logger.info(
            f"Insertion complete: {summary['n_satellites_active']} active, "
            f"{summary['n_satellites_discarded']} discarded, "
            f"{summary['coverage_pct']:.2f}% coverage ({elapsed:.1f}s)"
        )
        return run

    def run_parallel(self, fixed: Sequence[KeplerianElements]) -> CoverageRun:
        """Evaluate a predefined satellite list with insertion disabled

        Predefined satellites exist from departure, so their connect deadline
        is the whole flight: they turn Active on first contact and are
        Discarded only if they never see the aircraft.
        """
        if not fixed:
            raise ValidationError("parallel mode needs at least one satellite", key="satellites")
        if len(fixed) > self.policy.max_satellites:
            raise ValidationError(
                f"{len(fixed)} satellites exceed max_satellites={self.policy.max_satellites}",
                key="satellites",
            )
        logger.info(f"Evaluating {len(fixed)} predefined satellites")
        departure = float(self.grid[0])
        satellites = [Satellite(id=i, elements=e, inserted_t_s=departure) for i, e in enumerate(fixed)]
        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                computed = list(pool.map(self._links, satellites))
        else:
            computed = [self._links(s) for s in satellites]
        links = {s.id: link for s, link in zip(satellites, computed)}
        timeout = float(self.grid[-1] - departure) + self.flight.timestep_s
        for satellite in satellites:
            self._resolve(satellite, links[satellite.id][0], timeout)
        run = self._finish(satellites, links, budget_exhausted=False)
        logger.info(f"Parallel evaluation complete: {run.summary['coverage_pct']:.2f}% coverage")
        return run


def run_sequential_insertion(
    plan: FlightPath,
    policy: Optional[InsertionPolicy] = None,
    mask: Optional[VisibilityMask] = None,
    threads: int = 1,
    progress: bool = False,
) -> tuple[list[Satellite], CoverageTimeline]:
    """Functional entry point returning (satellites, timeline)"""
    run = ConstellationManager(plan, policy, mask, threads=threads, progress=progress).run_sequential_insertion()
    return run.satellites, run.timeline
