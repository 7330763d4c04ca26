import numpy as np
from scipy import ndimage

from domain.coding.message import ChangeMap
from domain.common.errors import InvariantViolation
from domain.cost.model import CostMap, check_aligned

DEFAULT_BETA = 10.0

NEIGHBORHOODS: dict[str, np.ndarray] = {
    # 4-connected: the pixels of the other sub-lattices
    "cross": np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=np.int64),
    "diagonal": np.array([[1, 0, 1], [0, 0, 0], [1, 0, 1]], dtype=np.int64),
}


def check_beta(beta: float) -> float:
    if not beta > 1:
        raise InvariantViolation(f"CMD factor beta must exceed 1, got {beta}")
    return float(beta)


def neighbor_sums(changes: ChangeMap, neighborhood: str = "cross") -> np.ndarray:
    """Sum of changes over each pixel's neighbors; outside the image counts as 0."""
    try:
        kernel = NEIGHBORHOODS[neighborhood]
    except KeyError:
        raise InvariantViolation(
            f"Unknown neighborhood {neighborhood!r}; expected one of {sorted(NEIGHBORHOODS)}"
        ) from None
    return ndimage.correlate(changes.delta.astype(np.int64), kernel, mode="constant", cval=0)


def adjust_costs(
    initial: CostMap,
    changes: ChangeMap,
    beta: float,
    neighborhood: str = "cross",
) -> CostMap:
    """
    Discount the direction the neighbors moved in: rho+ = xi+/beta where the
    neighbor sum is positive, rho- = xi-/beta where it is negative.
    Always derived from `initial`; wet directions stay wet.
    """
    beta = check_beta(beta)
    check_aligned(initial, changes.shape, "change map")
    s = neighbor_sums(changes, neighborhood)
    rho_plus = np.where((s > 0) & ~initial.wet_plus, initial.rho_plus / beta, initial.rho_plus)
    rho_minus = np.where((s < 0) & ~initial.wet_minus, initial.rho_minus / beta, initial.rho_minus)
    return initial.replace(rho_plus, rho_minus)
