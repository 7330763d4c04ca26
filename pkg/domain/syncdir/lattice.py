from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from domain.common.errors import InvariantViolation
from domain.image.model import GrayImage


@dataclass(frozen=True, order=True)
class SubLatticeId:
    """Pixels (i, j), 1-based, with i = a (mod 2) and j = b (mod 2)."""
    a: int
    b: int

    def __post_init__(self):
        if self.a not in (1, 2) or self.b not in (1, 2):
            raise InvariantViolation(f"Sub-lattice residues must be 1 or 2, got ({self.a},{self.b})")

    @property
    def rows(self) -> slice:
        return slice(self.a - 1, None, 2)

    @property
    def cols(self) -> slice:
        return slice(self.b - 1, None, 2)

    def mask(self, shape: tuple[int, int]) -> np.ndarray:
        selected = np.zeros(shape, dtype=bool)
        selected[self.rows, self.cols] = True
        return selected

    @classmethod
    def parse(cls, text: str) -> "SubLatticeId":
        try:
            a, b = (int(part) for part in text.strip().strip("()").split(","))
        except ValueError:
            raise InvariantViolation(f"Malformed sub-lattice id {text!r}") from None
        return cls(a, b)

    def __str__(self) -> str:
        return f"({self.a},{self.b})"


# embedding loop, also the fixed order in which message segments are assigned
LOOP: tuple[SubLatticeId, ...] = (
    SubLatticeId(1, 1),
    SubLatticeId(1, 2),
    SubLatticeId(2, 2),
    SubLatticeId(2, 1),
)


@dataclass(frozen=True)
class TraversalOrder:
    lattices: tuple[SubLatticeId, ...]

    def __post_init__(self):
        lattices = tuple(self.lattices)
        if len(lattices) != len(LOOP) or lattices[0] not in LOOP:
            raise InvariantViolation(f"Not a traversal of the sub-lattice loop: {lattices}")
        start = LOOP.index(lattices[0])
        if lattices != LOOP[start:] + LOOP[:start]:
            raise InvariantViolation(f"Traversal {lattices} is not a rotation of the loop")
        object.__setattr__(self, "lattices", lattices)

    @property
    def start(self) -> SubLatticeId:
        return self.lattices[0]

    def __iter__(self):
        return iter(self.lattices)

    def __len__(self) -> int:
        return len(self.lattices)

    def __str__(self) -> str:
        return "->".join(str(s) for s in self.lattices)


def traversal_order(start: SubLatticeId) -> TraversalOrder:
    i = LOOP.index(start)
    return TraversalOrder(LOOP[i:] + LOOP[:i])


def random_start(rng: np.random.Generator) -> SubLatticeId:
    return LOOP[int(rng.integers(len(LOOP)))]


def segment_index(lattice: SubLatticeId) -> int:
    return LOOP.index(lattice)


def check_even(shape: tuple[int, int]) -> None:
    height, width = shape
    if height % 2 or width % 2:
        raise InvariantViolation(f"odd dimension: {width}x{height}")


def decompose(img: GrayImage) -> dict[SubLatticeId, list[tuple[int, int]]]:
    """1-based pixel coordinates of each sub-lattice, row-major."""
    check_even(img.shape)
    return {
        lattice: [
            (i, j)
            for i in range(lattice.a, img.height + 1, 2)
            for j in range(lattice.b, img.width + 1, 2)
        ]
        for lattice in LOOP
    }
