"""
Syndrome-trellis codes: binary minimal-distortion embedding with a Viterbi
search over the 2^h states of the running syndrome window.

Message bit i owns a block of consecutive cover bits. The first column of
every block is the pattern `hat`; wider blocks take further columns from a
stream seeded by `hat`. Bit k of a column pattern lands on syndrome row i + k,
and rows past the message end are dropped.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from domain.coding.message import BitMessage
from domain.common.errors import (
    CapacityExceeded,
    InvariantViolation,
    LengthMismatch,
    StcInfeasible,
)
from domain.common.seeding import generator
from domain.cost.model import WET_VALUE

logger = logging.getLogger(__name__)

DEFAULT_H = 10
DEFAULT_HAT = 0b1001010111
MAX_H = 31

_SERIALIZED = re.compile(r"^h:(\d+),hat:(0x[0-9a-fA-F]+|[0-9a-fA-F]+),rate:(\d+)/(\d+)$")


@dataclass(frozen=True)
class StcParams:
    h: int = DEFAULT_H
    hat: int = DEFAULT_HAT
    rate: Fraction = Fraction(1, 2)

    def __post_init__(self):
        if not 1 <= self.h <= MAX_H:
            raise InvariantViolation(f"Constraint height must be in 1..{MAX_H}, got {self.h}")
        if not 0 < self.hat < (1 << self.h):
            raise InvariantViolation(f"hat {self.hat:#x} does not fit in {self.h} bits")
        if not (self.hat & 1 and self.hat >> (self.h - 1) & 1):
            raise InvariantViolation(f"hat {self.hat:#x} must have its top and bottom bits set")
        rate = Fraction(self.rate)
        if not 0 <= rate <= 1:
            raise InvariantViolation(f"Rate must lie in [0, 1], got {rate}")
        object.__setattr__(self, "rate", rate)

    def with_rate(self, message_bits: int, cover_bits: int) -> "StcParams":
        if cover_bits <= 0:
            return replace(self, rate=Fraction(0))
        return replace(self, rate=Fraction(message_bits, cover_bits))

    def message_length(self, cover_bits: int) -> int:
        m = self.rate * cover_bits
        if m.denominator != 1:
            raise LengthMismatch(f"{cover_bits} cover bits are not a whole multiple of rate {self.rate}")
        return int(m)

    def serialize(self) -> str:
        return f"h:{self.h},hat:{self.hat:#x},rate:{self.rate.numerator}/{self.rate.denominator}"

    @classmethod
    def parse(cls, text: str) -> "StcParams":
        match = _SERIALIZED.match(text.strip())
        if not match:
            raise InvariantViolation(f"Malformed STC parameters: {text!r}")
        h, hat, p, q = match.groups()
        if int(q) == 0:
            raise InvariantViolation(f"Malformed STC rate in {text!r}")
        return cls(h=int(h), hat=int(hat, 16), rate=Fraction(int(p), int(q)))


@lru_cache(maxsize=64)
def block_columns(h: int, hat: int, width: int) -> tuple[int, ...]:
    """Column patterns of one block; a prefix of the widest block."""
    if width <= 1:
        return (hat,)[:max(width, 0)]
    rng = generator(hat, h)
    extra = rng.integers(0, 1 << h, size=width - 1, dtype=np.int64)
    forced = extra | 1 | (1 << (h - 1))
    return (hat, *(int(c) for c in forced))


def block_widths(n: int, m: int) -> np.ndarray:
    edges = (np.arange(m + 1, dtype=np.int64) * n) // m
    return np.diff(edges)


def _layout(n: int, m: int, params: StcParams) -> tuple[np.ndarray, np.ndarray]:
    """Per cover bit: owning message row and column pattern."""
    widths = block_widths(n, m)
    rows = np.repeat(np.arange(m, dtype=np.int64), widths)
    widest = int(widths.max()) if m else 0
    patterns = np.array(block_columns(params.h, params.hat, widest), dtype=np.int64)
    offsets = np.concatenate([np.arange(w) for w in widths]) if m else np.zeros(0, dtype=np.int64)
    return rows, patterns[offsets]


def parity_check_matrix(n: int, m: int, params: StcParams) -> np.ndarray:
    """Dense m x n matrix H of the code, for inspection and tests."""
    H = np.zeros((m, n), dtype=np.uint8)
    if m == 0:
        return H
    rows, cols = _layout(n, m, params)
    for j in range(n):
        for k in range(params.h):
            if cols[j] >> k & 1 and rows[j] + k < m:
                H[rows[j] + k, j] = 1
    return H


def _as_bits(values, what: str) -> np.ndarray:
    bits = np.asarray(values).astype(np.int64).ravel()
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise InvariantViolation(f"{what} must be 0/1")
    return bits


def syndrome(bits, params: StcParams, m: int) -> np.ndarray:
    y = _as_bits(bits, "bits")
    n = y.size
    if m == 0:
        return np.zeros(0, dtype=np.uint8)
    rows, cols = _layout(n, m, params)
    acc = np.zeros(m + params.h, dtype=np.int64)
    for k in range(params.h):
        hit = (y == 1) & ((cols >> k) & 1).astype(bool)
        acc += np.bincount(rows[hit] + k, minlength=m + params.h)
    return (acc[:m] % 2).astype(np.uint8)


def stc_decode(stego_bits, params: StcParams) -> BitMessage:
    y = _as_bits(stego_bits, "Stego bits")
    m = params.message_length(y.size)
    return BitMessage(syndrome(y, params, m))


def stc_encode(cover_bits, message: BitMessage, bit_costs, params: StcParams) -> np.ndarray:
    """
    Stego bits y with H y = message, minimizing the summed cost of flipped bits.
    """
    x = _as_bits(cover_bits, "Cover bits")
    costs = np.asarray(bit_costs, dtype=np.float64).ravel()
    n, m = x.size, message.length
    if costs.size != n:
        raise LengthMismatch(f"{costs.size} costs for {n} cover bits")
    if np.any(costs < 0) or not np.all(np.isfinite(costs)):
        raise InvariantViolation("Bit costs must be finite and non-negative")
    if m > n:
        raise CapacityExceeded(f"{m} message bits do not fit {n} cover bits")
    if n and Fraction(m, n) != params.rate:
        raise LengthMismatch(f"{m} message bits over {n} cover bits is not rate {params.rate}")
    if m == 0:
        return x.astype(np.uint8)

    y, distortion = _viterbi(x, message.bits.astype(np.int64), costs, params)
    if distortion >= WET_VALUE:
        raise StcInfeasible(f"Every coset member flips a wet bit (distortion {distortion:g})")
    return y


def _viterbi(x: np.ndarray, msg: np.ndarray, costs: np.ndarray, params: StcParams) -> tuple[np.ndarray, float]:
    n, m, h = x.size, msg.size, params.h
    states = 1 << h
    half = states >> 1
    idx = np.arange(states, dtype=np.int64)
    widths = block_widths(n, m)
    patterns = block_columns(h, params.hat, int(widths.max()))

    cost = np.full(states, np.inf)
    cost[0] = 0.0
    took_one = np.zeros((n, states), dtype=bool)

    j = 0
    for i in range(m):
        for offset in range(int(widths[i])):
            col = patterns[offset]
            w = costs[j]
            stay = cost + (w if x[j] else 0.0)
            flip = cost[idx ^ col] + (0.0 if x[j] else w)
            took_one[j] = flip < stay
            cost = np.where(took_one[j], flip, stay)
            j += 1
        shifted = np.full(states, np.inf)
        shifted[:half] = cost[msg[i]::2]
        cost = shifted

    state = int(np.argmin(cost))
    distortion = float(cost[state])
    y = np.zeros(n, dtype=np.uint8)
    j = n - 1
    for i in range(m - 1, -1, -1):
        state = (state << 1) | int(msg[i])
        for offset in range(int(widths[i]) - 1, -1, -1):
            if took_one[j, state]:
                y[j] = 1
                state ^= patterns[offset]
            j -= 1
    logger.debug("STC n=%d m=%d h=%d distortion=%.6g", n, m, h, distortion)
    return y, distortion


def default_hat(h: int) -> int:
    """Production pattern for h = 10; otherwise both end bits plus alternating middle bits."""
    if h == DEFAULT_H:
        return DEFAULT_HAT
    if not 1 <= h <= MAX_H:
        raise InvariantViolation(f"Constraint height must be in 1..{MAX_H}, got {h}")
    ends = 1 | (1 << (h - 1))
    return ends | (0x2AAAAAAA & ((1 << max(h - 1, 0)) - 1))
