from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from domain.common.errors import DimensionMismatch, InvariantViolation, LengthMismatch
from domain.image.model import GrayImage, MAX_INTENSITY


@dataclass(frozen=True, eq=False)
class BitMessage:
    """
    Secret data as a sequence of bits. Byte files map to bits MSB-first.
    """
    bits: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.bits)
        if data.ndim != 1:
            raise InvariantViolation("Message bits must be a flat sequence")
        if data.size and not np.all((data == 0) | (data == 1)):
            raise InvariantViolation("Message bits must be 0 or 1")
        frozen = data.astype(np.uint8, copy=True)
        frozen.setflags(write=False)
        object.__setattr__(self, "bits", frozen)

    @property
    def length(self) -> int:
        return int(self.bits.size)

    def __len__(self) -> int:
        return self.length

    @classmethod
    def empty(cls) -> "BitMessage":
        return cls(np.zeros(0, dtype=np.uint8))

    @classmethod
    def random(cls, rng: np.random.Generator, length: int) -> "BitMessage":
        return cls(rng.integers(0, 2, size=length, dtype=np.uint8))

    @classmethod
    def from_bytes(cls, payload: bytes, length: int) -> "BitMessage":
        bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), bitorder="big")
        if length < 0 or length > bits.size:
            raise LengthMismatch(f"Declared {length} bits but the payload holds {bits.size}")
        return cls(bits[:length])

    def to_bytes(self) -> bytes:
        return np.packbits(self.bits, bitorder="big").tobytes()

    def segments(self, count: int) -> list["BitMessage"]:
        """
        Split into `count` contiguous parts; the first `length % count` parts take one extra bit.
        """
        parts, start = [], 0
        for size in segment_lengths(self.length, count):
            parts.append(BitMessage(self.bits[start:start + size]))
            start += size
        return parts

    @classmethod
    def concat(cls, parts) -> "BitMessage":
        arrays = [p.bits for p in parts]
        return cls(np.concatenate(arrays) if arrays else np.zeros(0, dtype=np.uint8))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMessage):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    __hash__ = None

    def __repr__(self) -> str:
        return f"BitMessage({self.length} bits)"


@dataclass(frozen=True, eq=False)
class ChangeMap:
    """Per-pixel change in {-1, 0, +1}."""
    delta: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.delta)
        if data.ndim != 2:
            raise InvariantViolation("Change map must be 2-D")
        if data.size and not np.all(np.abs(data) <= 1):
            raise InvariantViolation("Changes must lie in {-1, 0, +1}")
        frozen = data.astype(np.int8, copy=True)
        frozen.setflags(write=False)
        object.__setattr__(self, "delta", frozen)

    @property
    def shape(self) -> tuple[int, int]:
        return self.delta.shape

    @property
    def changed(self) -> int:
        return int(np.count_nonzero(self.delta))

    @classmethod
    def zeros(cls, shape: tuple[int, int]) -> "ChangeMap":
        return cls(np.zeros(shape, dtype=np.int8))

    @classmethod
    def between(cls, before: GrayImage, after: GrayImage) -> "ChangeMap":
        if before.shape != after.shape:
            raise DimensionMismatch(f"Images {before.shape} and {after.shape} differ in size")
        return cls(after.as_int() - before.as_int())

    def fits(self, cover: GrayImage) -> bool:
        moved = cover.as_int() + self.delta
        return bool(moved.min() >= 0 and moved.max() <= MAX_INTENSITY)

    def apply(self, cover: GrayImage) -> GrayImage:
        if cover.shape != self.shape:
            raise DimensionMismatch(f"Change map {self.shape} does not match image {cover.shape}")
        if not self.fits(cover):
            raise InvariantViolation("Changes push pixels outside [0, 255]")
        return cover.with_changes(self.delta)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChangeMap):
            return NotImplemented
        return np.array_equal(self.delta, other.delta)

    __hash__ = None


def segment_lengths(length: int, count: int) -> list[int]:
    base, extra = divmod(length, count)
    return [base + (1 if i < extra else 0) for i in range(count)]
