"""
Double-layer ternary embedding on top of the binary STC.

A +-1 change always moves the LSB, and exactly one of the two directions also
moves the second LSB (x-1 from an even pixel, x+1 from an odd one). The
second-LSB layer is coded first: flipping it commits the pixel to that
direction. The LSB layer is coded second over the remaining pixels, where a
flip means moving in the other direction; pixels already committed are wet.

Both layers use binary costs taken from the Gibbs probabilities at the
multiplier that makes the ternary entropy equal the payload.
"""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy import optimize

from domain.coding.message import BitMessage
from domain.coding.probabilities import solve_lambda
from domain.coding.stc import StcParams, stc_decode, stc_encode
from domain.common.errors import (
    CapacityExceeded,
    InfeasiblePayload,
    InvariantViolation,
    LengthMismatch,
    StcInfeasible,
)
from domain.common.seeding import generator
from domain.cost.model import WET_VALUE, CostMap
from domain.image.model import MAX_INTENSITY

logger = logging.getLogger(__name__)

LOG2_3 = math.log2(3)
LAYER_RETRIES = 8
RETRY_STREAM = 0x7E7

_BETA_MAX = 2.0 / 3.0


def _h2(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def _ternary_rate(beta: float) -> float:
    # bits per pixel of a symmetric ternary source with change rate beta
    return _h2(beta) + beta


def layer_split(message_bits: int, pixels: int) -> tuple[int, int]:
    """
    Bits for the second-LSB layer and for the LSB layer, from (message length, pixel count) alone.

    The change rate beta solves h2(beta) + beta = m / n. Half of the changes
    flip the second LSB, so that layer gets n * h2(beta / 2) bits and the LSB
    layer the rest.
    """
    if message_bits < 0 or pixels < 0:
        raise InvariantViolation("Message and pixel counts must be non-negative")
    if message_bits == 0:
        return 0, 0
    if pixels == 0:
        raise CapacityExceeded(f"{message_bits} bits do not fit an empty cover")
    if message_bits > math.floor(pixels * LOG2_3):
        raise CapacityExceeded(
            f"{message_bits} bits exceed the double-layer capacity of {pixels} pixels"
        )
    rate = message_bits / pixels
    if rate >= _ternary_rate(_BETA_MAX):
        beta = _BETA_MAX
    else:
        beta = optimize.brentq(lambda b: _ternary_rate(b) - rate, 1e-15, _BETA_MAX, xtol=1e-14)
    second_bits = min(int(round(pixels * _h2(beta / 2))), message_bits)
    return second_bits, message_bits - second_bits


def _check_inputs(cover: np.ndarray, rho_plus: np.ndarray, rho_minus: np.ndarray) -> None:
    if not (cover.shape == rho_plus.shape == rho_minus.shape):
        raise LengthMismatch(
            f"{cover.size} pixels with {rho_plus.size}/{rho_minus.size} directional costs"
        )
    if cover.size and (cover.min() < 0 or cover.max() > MAX_INTENSITY):
        raise InvariantViolation("Cover intensities must lie in [0, 255]")


def _multiplier(rho_plus: np.ndarray, rho_minus: np.ndarray, message_bits: int) -> float:
    costs = CostMap(rho_plus.reshape(1, -1), rho_minus.reshape(1, -1))
    try:
        return solve_lambda(costs, message_bits).lam
    except InfeasiblePayload as exc:
        raise CapacityExceeded(str(exc)) from exc


def ternary_embed_stc(cover_pixels, message: BitMessage, costs, params: StcParams) -> np.ndarray:
    """
    Embed `message` into a flat pixel sequence with changes in {-1, 0, +1}.
    `costs` is the pair (rho_plus, rho_minus); wet entries hold the wet value.
    """
    x = np.asarray(cover_pixels, dtype=np.int64).ravel()
    rho_plus = np.asarray(costs[0], dtype=np.float64).ravel()
    rho_minus = np.asarray(costs[1], dtype=np.float64).ravel()
    _check_inputs(x, rho_plus, rho_minus)
    rho_plus = np.where(x == MAX_INTENSITY, WET_VALUE, np.minimum(rho_plus, WET_VALUE))
    rho_minus = np.where(x == 0, WET_VALUE, np.minimum(rho_minus, WET_VALUE))

    n = x.size
    second_bits, lsb_bits = layer_split(message.length, n)
    if message.length == 0:
        return x.copy()
    if np.all((rho_plus >= WET_VALUE) & (rho_minus >= WET_VALUE)):
        raise StcInfeasible(f"All {n} pixels are wet")
    second_message = BitMessage(message.bits[:second_bits])
    lsb_message = BitMessage(message.bits[second_bits:])

    # the direction that also flips the second LSB, and the one that keeps it
    flip_dir = np.where(x % 2 == 0, -1, 1)
    rho_flip = np.where(flip_dir > 0, rho_plus, rho_minus)
    rho_keep = np.where(flip_dir > 0, rho_minus, rho_plus)

    lam = _multiplier(rho_plus, rho_minus, message.length)
    # -ln P(flip) + ln P(keep) at the Gibbs multiplier, in cost units
    second_costs = rho_flip + np.logaddexp(0.0, -lam * rho_keep) / lam
    second_costs = np.where(rho_flip >= WET_VALUE, WET_VALUE, np.minimum(second_costs, WET_VALUE))

    second_params = params.with_rate(second_bits, n)
    lsb_params = params.with_rate(lsb_bits, n)
    second = (x >> 1) & 1

    last_error: StcInfeasible | None = None
    for attempt in range(LAYER_RETRIES):
        layer_costs = second_costs
        if attempt:
            # another member of the second-LSB coset, hence other committed pixels
            jitter = 1.0 + 0.5 * generator(RETRY_STREAM, attempt, n).random(n)
            layer_costs = np.where(second_costs >= WET_VALUE, WET_VALUE, np.minimum(second_costs * jitter, WET_VALUE))
        committed = stc_encode(second, second_message, layer_costs, second_params) != second
        y = x + np.where(committed, flip_dir, 0)
        if lsb_bits == 0:
            return y

        lsb = y & 1
        lsb_costs = np.where(committed, WET_VALUE, rho_keep)
        try:
            moved = stc_encode(lsb, lsb_message, lsb_costs, lsb_params) != lsb
        except StcInfeasible as exc:
            last_error = exc
            logger.debug("LSB layer infeasible on attempt %d: %s", attempt, exc)
            continue
        return np.where(moved, x - flip_dir, y)

    raise StcInfeasible(f"LSB layer stayed infeasible after {LAYER_RETRIES} attempts: {last_error}")


def ternary_extract_stc(stego_pixels, message_bits: int, params: StcParams) -> BitMessage:
    y = np.asarray(stego_pixels, dtype=np.int64).ravel()
    n = y.size
    second_bits, lsb_bits = layer_split(message_bits, n)
    if message_bits == 0:
        return BitMessage.empty()
    second = stc_decode((y >> 1) & 1, params.with_rate(second_bits, n))
    lsb = stc_decode(y & 1, params.with_rate(lsb_bits, n))
    return BitMessage.concat([second, lsb])
