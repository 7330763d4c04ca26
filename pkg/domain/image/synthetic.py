from __future__ import annotations

import numpy as np
from scipy import ndimage

from domain.common.errors import InvariantViolation
from domain.common.seeding import generator
from domain.image.model import GrayImage, MAX_INTENSITY

MIN_COVER_SIZE = 16
SMOOTHING_PASSES = 2


def local_std(pixels: np.ndarray, size: int = 3) -> np.ndarray:
    x = np.asarray(pixels, dtype=np.float64)
    mean = ndimage.uniform_filter(x, size=size, mode="reflect")
    mean_sq = ndimage.uniform_filter(x * x, size=size, mode="reflect")
    return np.sqrt(np.maximum(mean_sq - mean * mean, 0.0))


def generate_cover(seed: int, width: int, height: int) -> GrayImage:
    """
    Reproducible textured cover: white noise, two 3x3 mean-filter passes,
    rescaled to span [0, 255].
    """
    if width < MIN_COVER_SIZE or height < MIN_COVER_SIZE:
        raise InvariantViolation(
            f"Synthetic covers need at least {MIN_COVER_SIZE}x{MIN_COVER_SIZE}, got {width}x{height}"
        )
    if width % 2 or height % 2:
        raise InvariantViolation(f"odd dimension: {width}x{height}")

    rng = generator(seed)
    field = rng.random((height, width))
    for _ in range(SMOOTHING_PASSES):
        field = ndimage.uniform_filter(field, size=3, mode="reflect")

    lo, hi = float(field.min()), float(field.max())
    if hi <= lo:
        raise InvariantViolation("Synthetic cover collapsed to a constant field")
    scaled = np.rint((field - lo) / (hi - lo) * MAX_INTENSITY).astype(np.uint8)

    if float(np.var(local_std(scaled))) <= 0.0:
        raise InvariantViolation("Synthetic cover has no texture variation")
    return GrayImage(scaled)
