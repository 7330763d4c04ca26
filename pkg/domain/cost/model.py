from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from domain.common.errors import DimensionMismatch, InvariantViolation

WET_VALUE = 1e13


@dataclass(frozen=True, eq=False)
class CostMap:
    """
    Directional embedding costs: rho_plus prices a +1 change, rho_minus a -1 change.
    Entries are finite and non-negative; forbidden directions hold exactly `wet_value`.
    The same type carries initial, CMD-adjusted and adversarial costs.
    """
    rho_plus: np.ndarray
    rho_minus: np.ndarray
    wet_value: float = WET_VALUE

    def __post_init__(self):
        plus = np.array(self.rho_plus, dtype=np.float64)
        minus = np.array(self.rho_minus, dtype=np.float64)
        if plus.ndim != 2 or plus.shape != minus.shape:
            raise DimensionMismatch(
                f"rho_plus {plus.shape} and rho_minus {minus.shape} must be equal 2-D grids"
            )
        if not (np.isfinite(self.wet_value) and self.wet_value > 0):
            raise InvariantViolation("wet_value must be a positive finite number")
        for name, grid in (("rho_plus", plus), ("rho_minus", minus)):
            if not np.all(np.isfinite(grid)):
                raise InvariantViolation(f"{name} contains NaN or Inf")
            if np.any(grid < 0):
                raise InvariantViolation(f"{name} contains negative costs")
            if np.any(grid > self.wet_value):
                raise InvariantViolation(f"{name} exceeds the wet value")
            grid.setflags(write=False)
        object.__setattr__(self, "rho_plus", plus)
        object.__setattr__(self, "rho_minus", minus)
        object.__setattr__(self, "wet_value", float(self.wet_value))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rho_plus.shape

    @property
    def height(self) -> int:
        return int(self.shape[0])

    @property
    def width(self) -> int:
        return int(self.shape[1])

    @property
    def wet_plus(self) -> np.ndarray:
        return self.rho_plus >= self.wet_value

    @property
    def wet_minus(self) -> np.ndarray:
        return self.rho_minus >= self.wet_value

    @property
    def dry_pixels(self) -> int:
        """Pixels with at least one direction that may be used."""
        return int(np.count_nonzero(~(self.wet_plus & self.wet_minus)))

    @classmethod
    def symmetric(cls, costs: np.ndarray, wet_value: float = WET_VALUE) -> "CostMap":
        grid = np.minimum(np.asarray(costs, dtype=np.float64), wet_value)
        return cls(grid, grid.copy(), wet_value)

    def at(self, rows, cols) -> "CostMap":
        return CostMap(self.rho_plus[rows, cols], self.rho_minus[rows, cols], self.wet_value)

    def replace(self, rho_plus: np.ndarray, rho_minus: np.ndarray) -> "CostMap":
        return CostMap(rho_plus, rho_minus, self.wet_value)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CostMap):
            return NotImplemented
        return (
            self.wet_value == other.wet_value
            and np.array_equal(self.rho_plus, other.rho_plus)
            and np.array_equal(self.rho_minus, other.rho_minus)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"CostMap({self.width}x{self.height}, wet={self.wet_value:g})"


def check_aligned(costs: CostMap, shape: tuple[int, ...], what: str = "grid") -> None:
    if tuple(costs.shape) != tuple(shape):
        raise DimensionMismatch(f"Cost map {tuple(costs.shape)} does not match {what} {tuple(shape)}")
