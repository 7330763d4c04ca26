import itertools

import numpy as np
import pytest

from domain.coding.message import BitMessage, ChangeMap
from domain.common.errors import InvariantViolation, LengthMismatch
from domain.cost.hill import hill_cost
from domain.cost.model import CostMap
from domain.cost.rules import apply_wet_bounds
from domain.evaluation.metrics import clustering_sign_test, direction_agreement
from domain.image.model import GrayImage
from domain.image.synthetic import generate_cover
from domain.syncdir.cmd import adjust_costs, neighbor_sums
from domain.syncdir.embedding import (
    EmbedConfig,
    embed_plain,
    embed_synchronized,
    extract_plain,
    extract_synchronized,
)
from domain.syncdir.lattice import LOOP, SubLatticeId, TraversalOrder, decompose, traversal_order

OFFSETS = {
    "cross": [(-1, 0), (0, -1), (0, 1), (1, 0)],
    "diagonal": [(-1, -1), (-1, 1), (1, -1), (1, 1)],
}


def test_decompose_partitions_the_grid():
    parts = decompose(GrayImage(np.zeros((4, 6), dtype=np.uint8)))
    assert parts[SubLatticeId(1, 1)] == [(1, 1), (1, 3), (1, 5), (3, 1), (3, 3), (3, 5)]
    assert parts[SubLatticeId(2, 1)][0] == (2, 1)
    every = sorted(p for coords in parts.values() for p in coords)
    assert every == [(i, j) for i in range(1, 5) for j in range(1, 7)]


def test_traversal_rotates_the_loop():
    order = traversal_order(SubLatticeId(2, 2))
    assert list(order) == [SubLatticeId(2, 2), SubLatticeId(2, 1), SubLatticeId(1, 1), SubLatticeId(1, 2)]
    assert str(order) == "(2,2)->(2,1)->(1,1)->(1,2)"
    with pytest.raises(InvariantViolation):
        TraversalOrder((LOOP[0], LOOP[2], LOOP[1], LOOP[3]))


def test_sublattice_parse():
    assert SubLatticeId.parse("(1,2)") == SubLatticeId(1, 2)
    for bad in ("(3,1)", "1;2", ""):
        with pytest.raises(InvariantViolation):
            SubLatticeId.parse(bad)


def _direct_rule(initial: CostMap, delta: np.ndarray, beta: float, offsets) -> tuple[float, float]:
    s = sum(delta[1 + di, 1 + dj] for di, dj in offsets)
    plus, minus = initial.rho_plus[1, 1], initial.rho_minus[1, 1]
    if s > 0 and plus < initial.wet_value:
        plus /= beta
    if s < 0 and minus < initial.wet_value:
        minus /= beta
    return plus, minus


@pytest.mark.parametrize("neighborhood", ["cross", "diagonal"])
def test_adjust_costs_matches_rule_on_every_neighborhood(neighborhood):
    initial = CostMap(np.full((3, 3), 2.0), np.full((3, 3), 3.0))
    for values in itertools.product((-1, 0, 1), repeat=8):
        delta = np.array(values[:4] + (0,) + values[4:]).reshape(3, 3)
        adjusted = adjust_costs(initial, ChangeMap(delta), 10.0, neighborhood)
        expected = _direct_rule(initial, delta, 10.0, OFFSETS[neighborhood])
        assert (adjusted.rho_plus[1, 1], adjusted.rho_minus[1, 1]) == pytest.approx(expected)


def test_adjust_costs_keeps_wet_and_uses_zero_padding():
    plus = np.full((4, 4), 1.0)
    plus[0, 1] = 1e13
    initial = CostMap(plus, np.ones((4, 4)))
    delta = np.zeros((4, 4), dtype=int)
    delta[0, 0] = 1
    adjusted = adjust_costs(initial, ChangeMap(delta), 4.0)
    assert adjusted.rho_plus[0, 1] == 1e13
    assert adjusted.rho_plus[1, 0] == 0.25
    assert neighbor_sums(ChangeMap(delta))[0, 0] == 0
    assert adjusted.rho_minus.tolist() == initial.rho_minus.tolist()


@pytest.mark.parametrize("beta", [1.0, 0.5])
def test_beta_must_exceed_one(beta):
    with pytest.raises(InvariantViolation):
        adjust_costs(CostMap.symmetric(np.ones((2, 2))), ChangeMap.zeros((2, 2)), beta)


def _embed(cover, rate, seed, coder="sim"):
    cfg = EmbedConfig(payload_rate=rate, seed=seed, coder_mode=coder)
    message = BitMessage.random(np.random.default_rng(seed), cfg.message_length(cover.width * cover.height))
    return cfg, message, embed_synchronized(cover, message, hill_cost(cover), cfg)


def test_zero_payload_returns_cover(cover64):
    cfg = EmbedConfig(payload_rate=0.0, seed=5)
    result = embed_synchronized(cover64, BitMessage.empty(), hill_cost(cover64), cfg)
    assert result.stego == cover64
    assert embed_plain(cover64, BitMessage.empty(), hill_cost(cover64), cfg) == cover64


def test_message_length_must_match_payload(cover64):
    cfg = EmbedConfig(payload_rate=0.4, seed=1)
    with pytest.raises(LengthMismatch):
        embed_synchronized(cover64, BitMessage(np.ones(10, dtype=int)), hill_cost(cover64), cfg)


def test_simulated_embedding_is_deterministic_and_ternary(cover64):
    _, _, first = _embed(cover64, 0.4, seed=9)
    _, _, again = _embed(cover64, 0.4, seed=9)
    assert first.stego == again.stego
    assert first.order == again.order
    delta = first.stego.as_int() - cover64.as_int()
    assert set(np.unique(delta)) <= {-1, 0, 1}
    assert np.count_nonzero(delta) > 0


def test_final_costs_follow_all_changes(cover64):
    cfg, _, result = _embed(cover64, 0.4, seed=2)
    base = apply_wet_bounds(hill_cost(cover64), cover64)
    expected = adjust_costs(base, ChangeMap.between(cover64, result.stego), cfg.beta)
    assert result.final_costs == expected


@pytest.mark.parametrize("rate", [0.2, 0.4])
def test_stc_round_trip(cover64, rate):
    cfg, message, result = _embed(cover64, rate, seed=17, coder="stc")
    assert extract_synchronized(result.stego, message.length, cfg.stc_params) == message


def test_stc_plain_round_trip(cover64):
    cfg = EmbedConfig(payload_rate=0.3, seed=4, coder_mode="stc")
    message = BitMessage.random(np.random.default_rng(4), cfg.message_length(64 * 64))
    stego = embed_plain(cover64, message, hill_cost(cover64), cfg)
    assert extract_plain(stego, message.length, cfg.stc_params) == message


def test_extremes_are_never_pushed_out(cover16):
    pixels = cover16.as_int()
    pixels[0, :] = 255
    pixels[-1, :] = 0
    cover = GrayImage(pixels)
    cfg = EmbedConfig(payload_rate=0.3, seed=3, coder_mode="stc")
    message = BitMessage.random(np.random.default_rng(3), cfg.message_length(256))
    stego = embed_synchronized(cover, message, hill_cost(cover), cfg).stego
    delta = stego.as_int() - pixels
    assert np.all(delta[0, :] <= 0) and np.all(delta[-1, :] >= 0)
    assert extract_synchronized(stego, message.length, cfg.stc_params) == message


def _agreements(count: int):
    synced, plain = [], []
    for i in range(count):
        cover = generate_cover(100 + i, 64, 64)
        cfg, message, result = _embed(cover, 0.4, seed=i)
        synced.append(direction_agreement(ChangeMap.between(cover, result.stego)))
        plain_stego = embed_plain(cover, message, hill_cost(cover), cfg)
        plain.append(direction_agreement(ChangeMap.between(cover, plain_stego)))
    return synced, plain


def test_synchronized_changes_cluster_more_than_plain():
    synced, plain = _agreements(12)
    result = clustering_sign_test(synced, plain)
    assert result.p_value < 0.05
    assert np.nanmean(synced) > np.nanmean(plain)


@pytest.mark.slow
def test_clustering_over_200_covers():
    result = clustering_sign_test(*_agreements(200))
    assert result.wins > result.losses
    assert result.p_value < 0.01
