import math

import numpy as np

from domain.common.errors import DimensionMismatch, InvariantViolation
from domain.cost.model import CostMap

DEFAULT_DELTA_GAMMA = 0.1
DEFAULT_GAMMA_MAX = 10.0


def intensity_grid(delta_gamma: float, gamma_max: float) -> list[int]:
    """
    Iteration counts k with k * delta_gamma < gamma_max; at least k = 1.
    """
    if delta_gamma <= 0 or gamma_max <= 0:
        raise InvariantViolation("delta_gamma and gamma_max must be positive")
    last = math.ceil(gamma_max / delta_gamma - 1e-9) - 1
    return list(range(1, max(last, 1) + 1))


def adversarial_costs(adjusted: CostMap, gradient: np.ndarray, k: int, delta_gamma: float) -> CostMap:
    """
    Skew the costs against the gradient sign with factor f = 1 + k * delta_gamma:
    a positive gradient makes +1 dearer and -1 cheaper, a negative one the reverse.
    Always derived from `adjusted`; wet directions stay wet.
    """
    gradient = np.asarray(gradient, dtype=np.float64)
    if gradient.shape != adjusted.shape:
        raise DimensionMismatch(f"Gradient {gradient.shape} does not match costs {adjusted.shape}")
    if k < 1:
        raise InvariantViolation(f"k must be at least 1, got {k}")
    if delta_gamma <= 0:
        raise InvariantViolation(f"delta_gamma must be positive, got {delta_gamma}")

    f = 1.0 + k * delta_gamma
    up, down = gradient > 0, gradient < 0
    plus, minus = adjusted.rho_plus, adjusted.rho_minus
    rho_plus = np.where(up, plus * f, np.where(down, plus / f, plus))
    rho_minus = np.where(up, minus / f, np.where(down, minus * f, minus))
    wet = adjusted.wet_value
    rho_plus = np.where(adjusted.wet_plus, wet, np.minimum(rho_plus, wet))
    rho_minus = np.where(adjusted.wet_minus, wet, np.minimum(rho_minus, wet))
    return adjusted.replace(rho_plus, rho_minus)
