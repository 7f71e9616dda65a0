"""Ceiling-centerline transmitter placement search"""

import itertools
import logging
from dataclasses import replace

import numpy as np

from src.cabin.raytracer import CabinScenario, fspl_db
from src.errors import ValidationError

logger = logging.getLogger(__name__)

MAX_LAYOUTS = 1_000_000


def _candidate_positions(scenario: CabinScenario, tx_index: int, candidates: int) -> list[tuple[float, float, float]]:
    # Transmitter i keeps its own segment [i·L/n, (i+1)·L/n]; candidates are segment interior points
    count = len(scenario.transmitters)
    length = scenario.geometry.length_m
    segment = length / count
    tx = scenario.transmitters[tx_index]
    _, y, z = tx.position_m
    return [
        (segment * tx_index + segment * (k + 1) / (candidates + 1), y, z)
        for k in range(candidates)
    ]


def _mean_los_loss(scenario: CabinScenario, tx_index: int, position) -> float:
    tx = scenario.transmitters[tx_index]
    origin = np.asarray(position, dtype=float)
    losses = []
    for rx in scenario.receivers:
        direction = (rx.position - origin)[np.newaxis]
        distance = float(np.linalg.norm(direction))
        gain = tx.gain_db(direction, direction[0], scenario.frequency_hz)[0]
        gain += rx.gain_db(-direction, -direction[0], scenario.frequency_hz)[0]
        losses.append(fspl_db(distance, scenario.frequency_hz) - float(gain))
    return float(np.mean(losses))


def optimize_transmitter_placement(scenario: CabinScenario, candidates_per_tx: int = 9) -> CabinScenario:
    """Move each transmitter along its ceiling segment to balance the per-Tx means

    The analytic line-of-sight loss, with both node gains applied, stands in
    for the best-path loss here. Exhaustive search is capped at MAX_LAYOUTS
    combinations.
    Combinations are ranked by spread of per-transmitter mean loss, then by
    the global mean, then by enumeration order.

    Returns:
        A copy of the scenario with relocated transmitters
    """
    if candidates_per_tx < 1:
        raise ValidationError("at least one candidate per transmitter is required", key="candidates_per_tx")
    if not scenario.transmitters or not scenario.receivers:
        raise ValidationError("placement needs transmitters and receivers", section="cabin.layout")
    layouts = candidates_per_tx ** len(scenario.transmitters)
    if layouts > MAX_LAYOUTS:
        raise ValidationError(
            f"placement search over {layouts} layouts exceeds {MAX_LAYOUTS}; use fewer candidates or transmitters",
            section="cabin.layout", key="placement_candidates",
        )

    candidates = [
        _candidate_positions(scenario, i, candidates_per_tx) for i in range(len(scenario.transmitters))
    ]
    means = np.array([
        [_mean_los_loss(scenario, i, position) for position in positions]
        for i, positions in enumerate(candidates)
    ])

    best_choice, best_score = None, None
    for choice in itertools.product(range(candidates_per_tx), repeat=len(candidates)):
        values = means[np.arange(len(choice)), choice]
        score = (float(values.max() - values.min()), float(values.mean()))
        if best_score is None or score < best_score:
            best_choice, best_score = choice, score

    transmitters = tuple(
        replace(tx, position_m=candidates[i][k]) for i, (tx, k) in enumerate(zip(scenario.transmitters, best_choice))
    )
    logger.info(
        f"Placement search: spread {best_score[0]:.2f} dB, mean {best_score[1]:.2f} dB over "
        f"{layouts} layouts"
    )
    return replace(scenario, transmitters=transmitters)
