import numpy as np

from domain.coding.message import ChangeMap
from domain.coding.probabilities import ProbabilityMap, solve_lambda
from domain.common.seeding import generator
from domain.common.errors import DimensionMismatch
from domain.cost.model import CostMap


def changes_from_draws(probs: ProbabilityMap, draws: np.ndarray, costs: CostMap | None = None) -> ChangeMap:
    """
    +1 where draw < p_plus, -1 where draw > 1 - p_minus, 0 otherwise.
    Wet directions of `costs` are never taken.
    """
    draws = np.asarray(draws, dtype=np.float64)
    if draws.shape != probs.shape:
        raise DimensionMismatch(f"draws {draws.shape} do not match probabilities {probs.shape}")
    delta = np.zeros(probs.shape, dtype=np.int8)
    delta[draws < probs.p_plus] = 1
    delta[draws > 1.0 - probs.p_minus] = -1
    if costs is not None:
        delta[(delta == 1) & costs.wet_plus] = 0
        delta[(delta == -1) & costs.wet_minus] = 0
    return ChangeMap(delta)


def simulate_embedding(costs: CostMap, target_bits: float, seed: int) -> ChangeMap:
    """
    Optimal embedding simulator: one uniform draw per pixel, consumed in
    row-major order from the stream of `seed`.
    """
    if target_bits == 0:
        return ChangeMap.zeros(costs.shape)
    probs = solve_lambda(costs, target_bits)
    draws = generator(seed).random(costs.shape)
    return changes_from_draws(probs, draws, costs)

