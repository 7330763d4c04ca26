"""
Iterative adversarial re-embedding of one sub-lattice at a time.

The cover-label gradient of the stego is computed once. For each sub-lattice,
in a seeded random loop order, the segment is re-embedded into the original
cover pixels with costs skewed against that gradient, growing the intensity
k * delta_gamma until the classifier says "cover". The transmitted image falls
back to the stego between sub-lattices and on failure.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

from domain.adversary.costs import DEFAULT_DELTA_GAMMA, DEFAULT_GAMMA_MAX, adversarial_costs, intensity_grid
from domain.adversary.network import COVER, THRESHOLD, ClassifierModel, classifier_forward, input_gradient
from domain.coding.message import BitMessage
from domain.common.errors import DimensionMismatch, InvariantViolation
from domain.common.seeding import check_seed, derive_seed, generator
from domain.cost.model import CostMap, check_aligned
from domain.image.model import GrayImage
from domain.syncdir.embedding import EmbedConfig, embed_sublattice
from domain.syncdir.lattice import LOOP, SubLatticeId, random_start, segment_index, traversal_order

logger = logging.getLogger(__name__)

ATTACK_START_STREAM = 21
CANDIDATE_STREAM = 22


@dataclass(frozen=True)
class AdvConfig:
    delta_gamma: float = DEFAULT_DELTA_GAMMA
    gamma_max: float = DEFAULT_GAMMA_MAX
    seed: int = 0

    def __post_init__(self):
        check_seed(self.seed)
        if not self.delta_gamma > 0 or not self.gamma_max > 0:
            raise InvariantViolation("delta_gamma and gamma_max must be positive")
        if self.delta_gamma > self.gamma_max:
            raise InvariantViolation(
                f"delta_gamma {self.delta_gamma} exceeds gamma_max {self.gamma_max}"
            )

    @property
    def intensities(self) -> list[int]:
        return intensity_grid(self.delta_gamma, self.gamma_max)

    @property
    def max_reembeds(self) -> int:
        return len(LOOP) * len(self.intensities)


@dataclass(frozen=True)
class AttackOutcome:
    adversarial_stego: GrayImage
    succeeded: bool
    gamma_used: float | None
    sublattices_tried: int
    reembeds: int
    phi_before: float
    phi_after: float
    lattice: SubLatticeId | None = None

    def __post_init__(self):
        if self.succeeded != (self.gamma_used is not None):
            raise InvariantViolation("gamma_used is set exactly when the attack succeeded")
        if self.reembeds < 0 or self.sublattices_tried < 0:
            raise InvariantViolation("Counts must be non-negative")


def ite_syn_attack(
    model: ClassifierModel,
    cover: GrayImage,
    message: BitMessage,
    stego: GrayImage,
    adjusted: CostMap,
    cfg: AdvConfig,
    embed_cfg: EmbedConfig,
) -> AttackOutcome:
    if cover.shape != stego.shape:
        raise DimensionMismatch(f"Cover {cover.shape} and stego {stego.shape} differ in size")
    check_aligned(adjusted, cover.shape, "cover")
    model.check_input(stego)

    phi_before = classifier_forward(model, stego)
    if phi_before >= THRESHOLD:
        return AttackOutcome(stego, True, 0.0, 0, 0, phi_before, phi_before)

    gradient = input_gradient(model, stego, COVER)
    segments = message.segments(len(LOOP))
    stego_delta = stego.as_int() - cover.as_int()
    order = traversal_order(random_start(generator(cfg.seed, ATTACK_START_STREAM)))

    reembeds = 0
    tried = 0
    for lattice in order:
        tried += 1
        index = segment_index(lattice)
        for k in cfg.intensities:
            gamma = k * cfg.delta_gamma
            costs = adversarial_costs(adjusted, gradient, k, cfg.delta_gamma)
            sub = embed_sublattice(
                cover, lattice, segments[index], costs, embed_cfg,
                derive_seed(cfg.seed, CANDIDATE_STREAM, index, k),
            )
            delta = stego_delta.copy()
            delta[lattice.rows, lattice.cols] = sub
            candidate = cover.with_changes(delta)
            reembeds += 1
            phi = classifier_forward(model, candidate)
            if phi >= THRESHOLD:
                logger.debug("fooled at %s gamma=%.2f after %d re-embeds", lattice, gamma, reembeds)
                return AttackOutcome(candidate, True, gamma, tried, reembeds, phi_before, phi, lattice)
        logger.debug("sub-lattice %s exhausted without success", lattice)

    return AttackOutcome(stego, False, None, tried, reembeds, phi_before, phi_before)
