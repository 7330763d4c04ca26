"""
Synchronized-direction embedding over the four 2x2 sub-lattices, the plain
whole-image baseline, and the receiver side of both.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from domain.coding.message import BitMessage, ChangeMap, segment_lengths
from domain.coding.simulator import simulate_embedding
from domain.coding.stc import DEFAULT_H, StcParams, default_hat
from domain.coding.ternary import ternary_embed_stc, ternary_extract_stc
from domain.common.errors import InvariantViolation, LengthMismatch
from domain.common.seeding import check_seed, derive_seed, generator
from domain.cost.model import CostMap, check_aligned
from domain.cost.rules import apply_wet_bounds
from domain.image.model import GrayImage
from domain.syncdir.cmd import DEFAULT_BETA, NEIGHBORHOODS, adjust_costs, check_beta
from domain.syncdir.lattice import (
    LOOP,
    SubLatticeId,
    TraversalOrder,
    check_even,
    random_start,
    segment_index,
    traversal_order,
)

logger = logging.getLogger(__name__)

CODER_MODES = ("sim", "stc")
LOG2_3 = math.log2(3)

START_STREAM = 1
LATTICE_STREAM = 2
PLAIN_STREAM = 3


@dataclass(frozen=True)
class EmbedConfig:
    """
    Sender settings shared by the synchronized and the plain embedder.
    """
    payload_rate: float
    seed: int
    beta: float = DEFAULT_BETA
    coder_mode: str = "sim"
    stc_h: int = DEFAULT_H
    neighborhood: str = "cross"

    def __post_init__(self):
        check_beta(self.beta)
        check_seed(self.seed)
        if not 0 <= self.payload_rate < LOG2_3:
            raise InvariantViolation(f"payload_rate must lie in [0, log2 3), got {self.payload_rate}")
        if self.coder_mode not in CODER_MODES:
            raise InvariantViolation(f"coder_mode must be one of {CODER_MODES}, got {self.coder_mode!r}")
        if self.neighborhood not in NEIGHBORHOODS:
            raise InvariantViolation(f"Unknown neighborhood {self.neighborhood!r}")
        StcParams(h=self.stc_h, hat=default_hat(self.stc_h))

    @property
    def stc_params(self) -> StcParams:
        return StcParams(h=self.stc_h, hat=default_hat(self.stc_h))

    def message_length(self, pixels: int) -> int:
        return int(round(self.payload_rate * pixels))


class SyncEmbedding(NamedTuple):
    stego: GrayImage
    final_costs: CostMap
    order: TraversalOrder


def lattice_seed(seed: int, lattice: SubLatticeId) -> int:
    return derive_seed(seed, LATTICE_STREAM, segment_index(lattice))


def embed_sublattice(
    cover: GrayImage,
    lattice: SubLatticeId,
    segment: BitMessage,
    costs: CostMap,
    cfg: EmbedConfig,
    seed: int,
) -> np.ndarray:
    """Changes for one sub-lattice, shaped like that sub-lattice."""
    sub_costs = costs.at(lattice.rows, lattice.cols)
    if cfg.coder_mode == "sim":
        return simulate_embedding(sub_costs, segment.length, seed).delta.astype(np.int16)
    pixels = cover.pixels[lattice.rows, lattice.cols].astype(np.int64)
    stego = ternary_embed_stc(
        pixels.ravel(), segment, (sub_costs.rho_plus.ravel(), sub_costs.rho_minus.ravel()), cfg.stc_params
    )
    return (stego.reshape(pixels.shape) - pixels).astype(np.int16)


def _check_message(cover: GrayImage, message: BitMessage, cfg: EmbedConfig) -> None:
    expected = cfg.message_length(cover.width * cover.height)
    if message.length != expected:
        raise LengthMismatch(
            f"Message has {message.length} bits; payload {cfg.payload_rate} on "
            f"{cover.width}x{cover.height} needs {expected}"
        )


def embed_synchronized(
    cover: GrayImage,
    message: BitMessage,
    initial: CostMap,
    cfg: EmbedConfig,
) -> SyncEmbedding:
    """
    Embed the four message segments sub-lattice by sub-lattice from a seeded
    random start, re-deriving the costs from `initial` after each one with the
    cumulative change map. Segment k always goes to LOOP[k].
    """
    check_even(cover.shape)
    check_aligned(initial, cover.shape, "cover")
    _check_message(cover, message, cfg)
    order = traversal_order(random_start(generator(cfg.seed, START_STREAM)))
    if message.length == 0:
        return SyncEmbedding(cover, initial, order)

    base = apply_wet_bounds(initial, cover)
    segments = message.segments(len(LOOP))
    delta = np.zeros(cover.shape, dtype=np.int16)
    costs = base
    for lattice in order:
        segment = segments[segment_index(lattice)]
        delta[lattice.rows, lattice.cols] = embed_sublattice(
            cover, lattice, segment, costs, cfg, lattice_seed(cfg.seed, lattice)
        )
        costs = adjust_costs(base, ChangeMap(delta), cfg.beta, cfg.neighborhood)
        logger.debug("sub-lattice %s: %d bits, %d changes", lattice, segment.length,
                     int(np.count_nonzero(delta[lattice.rows, lattice.cols])))
    return SyncEmbedding(ChangeMap(delta).apply(cover), costs, order)


def embed_plain(cover: GrayImage, message: BitMessage, initial: CostMap, cfg: EmbedConfig) -> GrayImage:
    """Whole-image embedding with the initial costs and no direction synchronization."""
    check_aligned(initial, cover.shape, "cover")
    _check_message(cover, message, cfg)
    if message.length == 0:
        return cover
    costs = apply_wet_bounds(initial, cover)
    if cfg.coder_mode == "sim":
        changes = simulate_embedding(costs, message.length, derive_seed(cfg.seed, PLAIN_STREAM))
        return changes.apply(cover)
    stego = ternary_embed_stc(
        cover.pixels.ravel(), message, (costs.rho_plus.ravel(), costs.rho_minus.ravel()), cfg.stc_params
    )
    return GrayImage(stego.reshape(cover.shape))


def extract_sublattice(stego: GrayImage, lattice: SubLatticeId, length: int, params: StcParams) -> BitMessage:
    pixels = stego.pixels[lattice.rows, lattice.cols]
    return ternary_extract_stc(pixels.ravel(), length, params)


def extract_synchronized(stego: GrayImage, message_bits: int, params: StcParams) -> BitMessage:
    """Read the four segments in fixed sub-lattice order; needs no knowledge of the start."""
    check_even(stego.shape)
    lengths = segment_lengths(message_bits, len(LOOP))
    return BitMessage.concat(
        extract_sublattice(stego, lattice, length, params) for lattice, length in zip(LOOP, lengths)
    )


def extract_plain(stego: GrayImage, message_bits: int, params: StcParams) -> BitMessage:
    return ternary_extract_stc(stego.pixels.ravel(), message_bits, params)
