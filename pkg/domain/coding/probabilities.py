"""
Gibbs change probabilities, their ternary entropy, and the search for the
Lagrange multiplier that makes the entropy equal to a payload.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from domain.common.errors import ConvergenceFailure, InfeasiblePayload, InvariantViolation
from domain.cost.model import CostMap

logger = logging.getLogger(__name__)

LAMBDA_MIN = 1e-10
LAMBDA_MAX = 1e10
MAX_BISECTIONS = 200
RELATIVE_WIDTH = 1e-12
LOG2_3 = math.log2(3)


@dataclass(frozen=True, eq=False)
class ProbabilityMap:
    p_plus: np.ndarray
    p_minus: np.ndarray
    p_zero: np.ndarray
    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise InvariantViolation(f"lambda must be non-negative, got {self.lam}")
        for name in ("p_plus", "p_minus", "p_zero"):
            grid = np.array(getattr(self, name), dtype=np.float64)
            if np.any(grid < 0) or np.any(grid > 1):
                raise InvariantViolation(f"{name} must lie in [0, 1]")
            grid.setflags(write=False)
            object.__setattr__(self, name, grid)
        if not (self.p_plus.shape == self.p_minus.shape == self.p_zero.shape):
            raise InvariantViolation("Probability grids must share one shape")
        if np.any(np.abs(self.p_plus + self.p_minus + self.p_zero - 1.0) > 1e-12):
            raise InvariantViolation("Probabilities must sum to one per pixel")

    @property
    def shape(self) -> tuple[int, int]:
        return self.p_plus.shape

    def expected_distortion(self, costs: CostMap) -> float:
        return float(np.sum(self.p_plus * costs.rho_plus + self.p_minus * costs.rho_minus))


def probabilities_from_costs(costs: CostMap, lam: float) -> ProbabilityMap:
    if lam < 0:
        raise InvariantViolation(f"lambda must be non-negative, got {lam}")
    # every exponent is <= 0, so nothing overflows; the no-change term is exp(0) = 1
    e_plus = np.exp(-lam * costs.rho_plus)
    e_minus = np.exp(-lam * costs.rho_minus)
    total = 1.0 + e_plus + e_minus
    return ProbabilityMap(
        p_plus=e_plus / total,
        p_minus=e_minus / total,
        p_zero=1.0 / total,
        lam=float(lam),
    )


def payload_of(probs: ProbabilityMap) -> float:
    """Ternary entropy in bits, summed over pixels (0 log 0 = 0)."""
    nats = special.entr(probs.p_plus) + special.entr(probs.p_minus) + special.entr(probs.p_zero)
    return float(np.sum(nats) / math.log(2))


def payload_tolerance(target_bits: float) -> float:
    return max(1e-6 * target_bits, 1e-3)


def solve_lambda(costs: CostMap, target_bits: float) -> ProbabilityMap:
    """
    Smallest-distortion Gibbs map carrying `target_bits`.
    Brackets lambda by doubling from LAMBDA_MIN, then bisects the bracket
    down to a relative width of 1e-12; payload is strictly decreasing in lambda.
    """
    if target_bits < 0 or not math.isfinite(target_bits):
        raise InfeasiblePayload(f"Payload must be a non-negative number of bits, got {target_bits}")
    tol = payload_tolerance(target_bits)
    if target_bits > costs.dry_pixels * LOG2_3 + tol:
        raise InfeasiblePayload(
            f"{target_bits:.1f} bits exceed the {costs.dry_pixels * LOG2_3:.1f}-bit capacity "
            f"of {costs.dry_pixels} dry pixels"
        )

    def payload(lam: float) -> float:
        return payload_of(probabilities_from_costs(costs, lam))

    lo = LAMBDA_MIN
    p_lo = payload(lo)
    if target_bits > p_lo + tol:
        raise InfeasiblePayload(
            f"{target_bits:.1f} bits exceed the reachable {p_lo:.1f} bits of this cost map"
        )
    if p_lo <= target_bits:
        return probabilities_from_costs(costs, lo)

    hi = lo
    while True:
        hi = min(hi * 2.0, LAMBDA_MAX)
        p_hi = payload(hi)
        if p_hi < target_bits:
            break
        if hi >= LAMBDA_MAX:
            if p_hi <= target_bits + tol:
                logger.debug("lambda capped at %g, payload %.6f bits", hi, p_hi)
                return probabilities_from_costs(costs, hi)
            raise ConvergenceFailure(
                f"Payload still {p_hi:.3f} bits at lambda={LAMBDA_MAX:g}; target {target_bits:.3f}"
            )
        lo = hi

    for _ in range(MAX_BISECTIONS):
        if hi - lo <= RELATIVE_WIDTH * hi:
            break
        mid = 0.5 * (lo + hi)
        if payload(mid) >= target_bits:
            lo = mid
        else:
            hi = mid
    else:
        raise ConvergenceFailure(f"Bisection did not narrow after {MAX_BISECTIONS} steps")

    lam = 0.5 * (lo + hi)
    probs = probabilities_from_costs(costs, lam)
    reached = payload_of(probs)
    if abs(reached - target_bits) > tol:
        raise ConvergenceFailure(
            f"lambda={lam:g} gives {reached:.6f} bits, target {target_bits:.6f} (tol {tol:g})"
        )
    logger.debug("lambda=%g payload=%.6f target=%.6f", lam, reached, target_bits)
    return probs
