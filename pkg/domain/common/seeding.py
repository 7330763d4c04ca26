from __future__ import annotations

import numpy as np

from domain.common.errors import InvariantViolation

SEED_MASK = (1 << 64) - 1


def check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise InvariantViolation(f"Seed must be an integer, got {seed!r}")
    if seed < 0 or seed > SEED_MASK:
        raise InvariantViolation(f"Seed must fit in 64 bits, got {seed}")
    return int(seed)


def seed_sequence(seed: int, *path: int) -> np.random.SeedSequence:
    """
    Named sub-stream of a master seed.
    The same (seed, path) always yields the same stream; different paths are independent.
    """
    return np.random.SeedSequence([check_seed(seed), *[int(p) for p in path]])


def generator(seed: int, *path: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *path)))


def derive_seed(seed: int, *path: int) -> int:
    """64-bit child seed, for APIs that take a plain integer seed."""
    return int(seed_sequence(seed, *path).generate_state(1, dtype=np.uint64)[0])
