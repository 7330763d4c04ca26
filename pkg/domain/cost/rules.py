import numpy as np

from domain.cost.model import CostMap, check_aligned
from domain.image.model import GrayImage, MAX_INTENSITY


def apply_wet_bounds(costs: CostMap, cover: GrayImage) -> CostMap:
    """
    +1 is forbidden at 255 and -1 at 0, so no change can leave [0, 255].
    """
    check_aligned(costs, cover.shape, "cover")
    pixels = cover.pixels
    rho_plus = np.where(pixels == MAX_INTENSITY, costs.wet_value, costs.rho_plus)
    rho_minus = np.where(pixels == 0, costs.wet_value, costs.rho_minus)
    return costs.replace(rho_plus, rho_minus)
