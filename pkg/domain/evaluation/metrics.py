from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from domain.adversary.network import THRESHOLD, ClassifierModel, cover_probabilities
from domain.coding.message import ChangeMap
from domain.common.errors import DimensionMismatch, InvariantViolation
from domain.image.model import GrayImage


def _check_rate(name: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise InvariantViolation(f"{name} must lie in [0, 1], got {value}")
    return float(value)


def compute_pe(p_fa: float, p_md: float) -> float:
    """Detection error: mean of false-alarm and missed-detection rates."""
    return (_check_rate("p_fa", p_fa) + _check_rate("p_md", p_md)) / 2.0


@dataclass(frozen=True)
class DetectionReport:
    p_fa: float
    p_md: float
    p_e: float
    n_cover: int
    n_stego: int

    def __post_init__(self):
        for name in ("p_fa", "p_md", "p_e"):
            _check_rate(name, getattr(self, name))
        if self.p_e != (self.p_fa + self.p_md) / 2.0:
            raise InvariantViolation("p_e must equal the mean of p_fa and p_md")

    @classmethod
    def from_rates(cls, p_fa: float, p_md: float, n_cover: int, n_stego: int) -> "DetectionReport":
        return cls(p_fa, p_md, compute_pe(p_fa, p_md), n_cover, n_stego)

    @property
    def accuracy(self) -> float:
        return 1.0 - self.p_e

    def as_row(self) -> dict:
        return {
            "p_fa": self.p_fa,
            "p_md": self.p_md,
            "p_e": self.p_e,
            "accuracy": self.accuracy,
            "n_cover": self.n_cover,
            "n_stego": self.n_stego,
        }


def evaluate_classifier(
    model: ClassifierModel,
    covers: Sequence[GrayImage],
    stegos: Sequence[GrayImage],
) -> DetectionReport:
    """
    p_fa is the share of covers called stego, p_md the share of stegos called cover.
    """
    covers, stegos = list(covers), list(stegos)
    if not covers or not stegos:
        raise InvariantViolation("Evaluation needs non-empty cover and stego sets")
    false_alarms = int(np.count_nonzero(cover_probabilities(model, covers) < THRESHOLD))
    misses = int(np.count_nonzero(cover_probabilities(model, stegos) >= THRESHOLD))
    return DetectionReport.from_rates(
        false_alarms / len(covers), misses / len(stegos), len(covers), len(stegos)
    )


def direction_agreement(changes: ChangeMap) -> float:
    """
    Share of 4-connected pairs of modified pixels that moved in the same direction.
    NaN when no such pair exists.
    """
    d = changes.delta.astype(np.int16)
    pairs = []
    for a, b in ((d[:, :-1], d[:, 1:]), (d[:-1, :], d[1:, :])):
        both = (a != 0) & (b != 0)
        pairs.append((int(np.count_nonzero(both & (a == b))), int(np.count_nonzero(both))))
    same = sum(p[0] for p in pairs)
    total = sum(p[1] for p in pairs)
    return same / total if total else float("nan")


def adversarial_noise(stego: GrayImage, adversarial: GrayImage) -> np.ndarray:
    if stego.shape != adversarial.shape:
        raise DimensionMismatch(f"Images {stego.shape} and {adversarial.shape} differ in size")
    return adversarial.as_int() - stego.as_int()


def verify_noise_identity(cover: GrayImage, stego: GrayImage, adversarial: GrayImage) -> bool:
    """Z - C == (Z - S) + (S - C), in integers."""
    noise = adversarial_noise(stego, adversarial)
    embedding = stego.as_int() - cover.as_int()
    return bool(np.array_equal(adversarial.as_int() - cover.as_int(), noise + embedding))


@dataclass(frozen=True)
class SignTest:
    wins: int
    losses: int
    ties: int
    p_value: float


def clustering_sign_test(synchronized: Sequence[float], plain: Sequence[float]) -> SignTest:
    """
    One-sided sign test that paired direction-agreement rates of synchronized
    embedding exceed those of plain embedding. Pairs with a NaN or a tie are dropped.
    """
    a = np.asarray(synchronized, dtype=np.float64)
    b = np.asarray(plain, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"Paired samples differ in length: {a.size} vs {b.size}")
    valid = ~(np.isnan(a) | np.isnan(b))
    diff = a[valid] - b[valid]
    wins = int(np.count_nonzero(diff > 0))
    losses = int(np.count_nonzero(diff < 0))
    ties = int(diff.size - wins - losses)
    if wins + losses == 0:
        return SignTest(0, 0, ties, 1.0)
    p = stats.binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue
    return SignTest(wins, losses, ties, float(p))
