import numpy as np
from scipy import ndimage

from domain.cost.model import CostMap, WET_VALUE
from domain.cost.rules import apply_wet_bounds
from domain.image.model import GrayImage

HIGH_PASS_KB = np.array(
    [[-1.0, 2.0, -1.0],
     [2.0, -4.0, 2.0],
     [-1.0, 2.0, -1.0]]
)
RESIDUAL_WINDOW = 3
SPREAD_WINDOW = 15
DENOMINATOR_FLOOR = 1e-10
# cost reached wherever the residual vanishes
HILL_CEILING = 1.0 / DENOMINATOR_FLOOR


def hill_profile(pixels: np.ndarray) -> np.ndarray:
    """Symmetric HILL cost grid, before wet bounds. Borders are mirror padded."""
    x = np.asarray(pixels, dtype=np.float64)
    residual = ndimage.correlate(x, HIGH_PASS_KB, mode="reflect")
    energy = ndimage.uniform_filter(np.abs(residual), size=RESIDUAL_WINDOW, mode="reflect")
    inverse = 1.0 / np.maximum(energy, DENOMINATOR_FLOOR)
    spread = ndimage.uniform_filter(inverse, size=SPREAD_WINDOW, mode="reflect")
    spread = np.nan_to_num(spread, nan=WET_VALUE, posinf=WET_VALUE)
    return np.minimum(spread, WET_VALUE)


def hill_cost(cover: GrayImage) -> CostMap:
    return apply_wet_bounds(CostMap.symmetric(hill_profile(cover.pixels)), cover)
