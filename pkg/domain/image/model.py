from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from domain.common.errors import InvariantViolation

MAX_INTENSITY = 255


@dataclass(frozen=True, eq=False)
class GrayImage:
    """
    8-bit grayscale carrier: cover, stego or adversarial stego.
    Pixels are a read-only (height, width) uint8 grid; both dimensions are even.
    """
    pixels: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.pixels)
        if data.ndim != 2:
            raise InvariantViolation(f"Image grid must be 2-D, got shape {data.shape}")
        if data.size == 0:
            raise InvariantViolation("Image must not be empty")
        if not np.issubdtype(data.dtype, np.integer):
            raise InvariantViolation(f"Image intensities must be integers, got {data.dtype}")
        if data.min() < 0 or data.max() > MAX_INTENSITY:
            raise InvariantViolation("Image intensities must lie in [0, 255]")
        height, width = data.shape
        if width % 2 or height % 2:
            raise InvariantViolation(f"odd dimension: {width}x{height}")

        frozen = data.astype(np.uint8, copy=True)
        frozen.setflags(write=False)
        object.__setattr__(self, "pixels", frozen)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    @classmethod
    def from_rows(cls, width: int, height: int, data) -> "GrayImage":
        flat = np.asarray(data)
        if flat.size != width * height:
            raise InvariantViolation(
                f"Image data has {flat.size} values, expected {width}x{height}"
            )
        return cls(flat.reshape(height, width))

    def as_int(self) -> np.ndarray:
        """Signed copy, safe for pixel arithmetic."""
        return self.pixels.astype(np.int16)

    def with_changes(self, delta: np.ndarray) -> "GrayImage":
        return GrayImage(self.as_int() + np.asarray(delta, dtype=np.int16))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self) -> int:
        return hash((self.shape, self.pixels.tobytes()))

    def __repr__(self) -> str:
        return f"GrayImage({self.width}x{self.height})"
