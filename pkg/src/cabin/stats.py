"""Per-transmitter path-loss statistics for boxplot reporting"""

from dataclasses import asdict, dataclass

import numpy as np

from src.cabin.raytracer import PathLossMatrix
from src.errors import PreconditionError, ValidationError


@dataclass(frozen=True)
class TransmitterStats:
    tx_id: int
    count: int
    mean: float
    median: float
    q1: float
    q3: float
    min: float
    max: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CabinStats:
    per_tx: list[TransmitterStats]
    global_mean: float
    kind: str = "best"

    @property
    def balance_db(self) -> float:
        """Spread between the largest and smallest per-transmitter mean"""
        means = [s.mean for s in self.per_tx]
        return max(means) - min(means)

    def to_dict(self) -> dict:
        return {
            "loss": self.kind,
            "global_mean_db": self.global_mean,
            "balance_db": self.balance_db,
            "transmitters": [s.to_dict() for s in self.per_tx],
        }


def describe(tx_id: int, losses: np.ndarray) -> TransmitterStats:
    """Five-number summary plus mean; quartiles use linear interpolation"""
    q1, median, q3 = np.percentile(losses, [25.0, 50.0, 75.0], method="linear")
    return TransmitterStats(
        tx_id=tx_id,
        count=int(len(losses)),
        mean=float(np.mean(losses)),
        median=float(median),
        q1=float(q1),
        q3=float(q3),
        min=float(np.min(losses)),
        max=float(np.max(losses)),
    )


def aggregate_stats(matrix: PathLossMatrix, use: str = "best") -> CabinStats:
    """Per-transmitter statistics over its links and the global mean

    Args:
        matrix: Path-loss matrix from score_paths
        use: "best" for strongest-path loss, "combined" for power-summed loss

    Returns:
        CabinStats ordered by tx_id
    """
    if use not in ("best", "combined"):
        raise ValidationError(f"unknown loss kind '{use}'", key="use")
    if not matrix.entries:
        raise PreconditionError("path-loss matrix is empty")
    per_tx = [describe(tx_id, matrix.losses(tx_id, use)) for tx_id in matrix.tx_ids]
    everything = np.concatenate([matrix.losses(tx_id, use) for tx_id in matrix.tx_ids])
    return CabinStats(per_tx=per_tx, global_mean=float(np.mean(everything)), kind=use)
