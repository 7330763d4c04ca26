from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from domain.adversary.attack import AttackOutcome
from domain.adversary.costs import DEFAULT_DELTA_GAMMA, DEFAULT_GAMMA_MAX
from domain.common.errors import InvariantViolation


@dataclass(frozen=True)
class AttackRecord:
    """One attacked image with its timing, as written to the attack CSV."""
    image_id: str
    payload: float
    mode: str
    outcome: AttackOutcome
    seconds: float = 0.0

    def as_row(self) -> dict:
        o = self.outcome
        return {
            "id": self.image_id,
            "payload": self.payload,
            "mode": self.mode,
            "succeeded": int(o.succeeded),
            "gamma_used": "" if o.gamma_used is None else round(o.gamma_used, 10),
            "reembeds": o.reembeds,
            "phi_before": o.phi_before,
            "phi_after": o.phi_after,
            "seconds": self.seconds,
        }


def _gamma_index(gamma: float, delta_gamma: float) -> int:
    return int(round(gamma / delta_gamma))


@dataclass(frozen=True)
class AttackReport:
    total: int
    succeeded: int
    success_rate: float
    gamma_histogram: dict[int, int] = field(default_factory=dict)
    reembed_counts: dict[int, int] = field(default_factory=dict)
    min_seconds: float = 0.0
    max_seconds: float = 0.0
    mean_seconds: float = 0.0
    delta_gamma: float = DEFAULT_DELTA_GAMMA

    def __post_init__(self):
        if self.total and self.success_rate != self.succeeded / self.total:
            raise InvariantViolation("success_rate must equal succeeded / total")
        if sum(self.gamma_histogram.values()) != self.succeeded:
            raise InvariantViolation("gamma histogram must sum to the number of successes")

    @property
    def success_percent(self) -> float:
        return 100.0 * self.success_rate

    @classmethod
    def from_records(cls, records: Sequence[AttackRecord], delta_gamma: float) -> "AttackReport":
        """Histogram keys are grid indices: gamma = key * delta_gamma."""
        outcomes = [r.outcome for r in records]
        total = len(outcomes)
        wins = [o for o in outcomes if o.succeeded]
        seconds = np.array([r.seconds for r in records], dtype=np.float64)
        return cls(
            total=total,
            succeeded=len(wins),
            success_rate=len(wins) / total if total else 0.0,
            gamma_histogram=dict(sorted(Counter(_gamma_index(o.gamma_used, delta_gamma) for o in wins).items())),
            reembed_counts=dict(sorted(Counter(o.reembeds for o in outcomes).items())),
            min_seconds=float(seconds.min()) if total else 0.0,
            max_seconds=float(seconds.max()) if total else 0.0,
            mean_seconds=float(seconds.mean()) if total else 0.0,
            delta_gamma=delta_gamma,
        )


def gamma_cdf(
    outcomes: Sequence[AttackOutcome],
    delta_gamma: float = DEFAULT_DELTA_GAMMA,
    gamma_max: float = DEFAULT_GAMMA_MAX,
) -> list[tuple[float, float]]:
    """
    (gamma, percent of all attempts that succeeded with gamma_used <= gamma)
    on the grid 0, delta_gamma, ..., gamma_max.
    """
    if delta_gamma <= 0 or gamma_max < 0:
        raise InvariantViolation("delta_gamma must be positive and gamma_max non-negative")
    points = _gamma_index(gamma_max, delta_gamma)
    total = len(outcomes)
    counts = np.zeros(points + 1, dtype=np.int64)
    for o in outcomes:
        if o.succeeded:
            counts[min(_gamma_index(o.gamma_used, delta_gamma), points)] += 1
    cumulative = np.cumsum(counts)
    return [
        (i * delta_gamma, 100.0 * cumulative[i] / total if total else 0.0)
        for i in range(points + 1)
    ]
