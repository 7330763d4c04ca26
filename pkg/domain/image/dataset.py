from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from domain.common.errors import InvariantViolation
from domain.common.seeding import check_seed, generator

SPLIT_NAMES = ("train", "validation", "test")


@dataclass(frozen=True)
class DatasetSplit:
    """
    Partition of image ids into train / validation / test.
    """
    train: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]
    seed: int

    def __post_init__(self):
        check_seed(self.seed)
        seen: set[str] = set()
        for name in SPLIT_NAMES:
            ids = getattr(self, name)
            overlap = seen.intersection(ids)
            if overlap or len(set(ids)) != len(ids):
                raise InvariantViolation(f"Split '{name}' overlaps another split or repeats ids")
            seen.update(ids)

    @property
    def all_ids(self) -> tuple[str, ...]:
        return self.train + self.validation + self.test

    def split_of(self, image_id: str) -> str:
        for name in SPLIT_NAMES:
            if image_id in getattr(self, name):
                return name
        raise InvariantViolation(f"Unknown image id {image_id!r}")


def make_split(
    ids: Sequence[str],
    *,
    train: int,
    validation: int,
    seed: int,
) -> DatasetSplit:
    """
    Seeded shuffle of `ids`; the first `train` go to train, the next `validation`
    to validation and the rest to test.
    """
    ids = list(ids)
    if len(set(ids)) != len(ids):
        raise InvariantViolation("Dataset ids must be unique")
    if train < 0 or validation < 0 or train + validation > len(ids):
        raise InvariantViolation(
            f"Cannot take {train} train + {validation} validation ids out of {len(ids)}"
        )
    order = generator(seed).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    return DatasetSplit(
        train=tuple(shuffled[:train]),
        validation=tuple(shuffled[train:train + validation]),
        test=tuple(shuffled[train + validation:]),
        seed=seed,
    )
