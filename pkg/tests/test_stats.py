#!/usr/bin/env python3
"""Test suite for per-transmitter statistics and placement search"""

import pytest

from src.cabin import (
    CabinGeometry,
    CabinScenario,
    LinkLoss,
    PathLossMatrix,
    aggregate_stats,
    default_receivers,
    default_transmitters,
    optimize_transmitter_placement,
    score_paths,
    trace,
)
from src.errors import PreconditionError, ValidationError


def _matrix(table: dict[int, list[float]]) -> PathLossMatrix:
    entries = {}
    for tx_id, losses in table.items():
        for rx_id, loss in enumerate(losses):
            entries[(tx_id, rx_id)] = LinkLoss(best_loss_db=loss, combined_loss_db=loss - 1.0, n_paths=3)
    return PathLossMatrix(entries=entries)


def test_equal_losses_collapse_the_box():
    """Test identical losses give identical quantiles"""
    stats = aggregate_stats(_matrix({0: [60.0] * 5}))
    summary = stats.per_tx[0]
    assert summary.min == summary.q1 == summary.median == summary.q3 == summary.max == 60.0
    assert stats.global_mean == 60.0
    assert stats.balance_db == 0.0


def test_two_values_split_evenly():
    """Test quartiles interpolate linearly between two values"""
    summary = aggregate_stats(_matrix({0: [50.0, 60.0]})).per_tx[0]
    assert summary.mean == summary.median == 55.0
    assert (summary.q1, summary.q3) == (52.5, 57.5)
    assert summary.count == 2


def test_global_mean_and_balance():
    """Test the global mean pools every link and balance spans per-Tx means"""
    stats = aggregate_stats(_matrix({0: [50.0, 54.0], 1: [60.0, 62.0, 64.0]}))
    assert [s.tx_id for s in stats.per_tx] == [0, 1]
    assert stats.global_mean == pytest.approx(58.0)
    assert stats.balance_db == pytest.approx(10.0)
    document = stats.to_dict()
    assert document["loss"] == "best"
    assert len(document["transmitters"]) == 2


def test_combined_kind():
    """Test the combined column is selectable"""
    stats = aggregate_stats(_matrix({0: [50.0, 60.0]}), use="combined")
    assert stats.global_mean == 54.0
    assert stats.kind == "combined"


def test_aggregate_errors():
    """Test empty matrices and unknown kinds are rejected"""
    with pytest.raises(PreconditionError):
        aggregate_stats(PathLossMatrix(entries={}))
    with pytest.raises(ValidationError):
        aggregate_stats(_matrix({0: [50.0]}), use="median")


def test_matrix_rows_ordered():
    """Test CSV rows come out ordered by (tx_id, rx_id)"""
    rows = _matrix({1: [61.0], 0: [50.0, 52.0]}).rows()
    assert [(r["tx_id"], r["rx_id"]) for r in rows] == [(0, 0), (0, 1), (1, 0)]
    assert rows[0]["best_loss_db"] == "50.0"


def _balance(scenario: CabinScenario) -> float:
    matrix, _ = score_paths(scenario, trace(scenario))
    return aggregate_stats(matrix).balance_db


def test_placement_keeps_segments_and_improves_balance():
    """Test optimized transmitters stay in their ceiling segments and never worsen balance"""
    scenario = CabinScenario.default(angular_separation_deg=10.0, max_reflections=0)
    optimized = optimize_transmitter_placement(scenario, candidates_per_tx=5)
    segment = scenario.geometry.length_m / len(scenario.transmitters)
    for index, (before, after) in enumerate(zip(scenario.transmitters, optimized.transmitters)):
        assert after.id == before.id
        assert segment * index < after.position_m[0] < segment * (index + 1)
        assert after.position_m[1:] == before.position_m[1:]
    assert _balance(optimized) <= _balance(scenario) + 1e-9


def test_placement_validation():
    """Test zero candidates are rejected"""
    with pytest.raises(ValidationError):
        optimize_transmitter_placement(CabinScenario.default(), candidates_per_tx=0)


def test_placement_rejects_oversized_search():
    """Test eight transmitters with nine candidates each are refused before any scoring"""
    geometry = CabinGeometry()
    scenario = CabinScenario(
        geometry=geometry,
        transmitters=tuple(default_transmitters(geometry, count=8)),
        receivers=tuple(default_receivers(geometry)),
    )
    with pytest.raises(ValidationError) as error:
        optimize_transmitter_placement(scenario, candidates_per_tx=9)
    assert error.value.key == "placement_candidates"
