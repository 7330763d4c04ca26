import numpy as np
import pytest
import torch

import domain.adversary.attack as attack_module
from domain.adversary.attack import ATTACK_START_STREAM, AdvConfig, ite_syn_attack
from domain.adversary.costs import adversarial_costs, intensity_grid
from domain.adversary.network import (
    COVER,
    STEGO,
    ClassifierModel,
    classifier_forward,
    classify,
    cover_probabilities,
    input_gradient,
    normalized_loss,
)
from domain.adversary.training import TrainSettings, init_network, train_classifier
from domain.coding.message import BitMessage
from domain.common.errors import DimensionMismatch, ImageFormatError, InvariantViolation
from domain.common.seeding import generator
from domain.cost.hill import hill_cost
from domain.cost.model import WET_VALUE, CostMap
from domain.evaluation.metrics import verify_noise_identity
from domain.image.synthetic import generate_cover
from domain.syncdir.embedding import EmbedConfig, embed_synchronized, extract_synchronized
from domain.syncdir.lattice import random_start, traversal_order
from infrastructure.model_repository import decode_model, encode_model, load_model, save_model
from tests.conftest import constant_model, nudge_to_threshold


def _random_model(size=16, seed=3):
    return ClassifierModel(network=init_network(seed), input_size=(size, size))


def _stego(cover, coder="sim", rate=0.3, seed=1):
    cfg = EmbedConfig(payload_rate=rate, seed=seed, coder_mode=coder)
    message = BitMessage.random(np.random.default_rng(seed), cfg.message_length(cover.width * cover.height))
    result = embed_synchronized(cover, message, hill_cost(cover), cfg)
    return cfg, message, result


def test_classify_uses_threshold(cover16):
    assert classify(constant_model(2.0), cover16) == COVER
    assert classify(constant_model(-2.0), cover16) == STEGO
    assert classifier_forward(constant_model(0.0), cover16) == pytest.approx(0.5)
    assert classify(constant_model(0.0), cover16) == COVER


def test_model_rejects_other_sizes(cover64):
    with pytest.raises(DimensionMismatch):
        classify(constant_model(1.0, size=16), cover64)


def test_input_gradient_matches_finite_differences(cover16):
    model = _random_model()
    grad = input_gradient(model, cover16, COVER, wrt="normalized")
    x = cover16.pixels.astype(np.float64) / 255.0 - 0.5
    eps = 1e-6
    for i, j in [(0, 0), (5, 7), (8, 3), (15, 15)]:
        up, down = x.copy(), x.copy()
        up[i, j] += eps
        down[i, j] -= eps
        numeric = (normalized_loss(model, up, COVER) - normalized_loss(model, down, COVER)) / (2 * eps)
        assert grad[i, j] == pytest.approx(numeric, rel=1e-4, abs=1e-9)


def test_gradient_sign_does_not_depend_on_input_scaling(cover16):
    model = _random_model()
    wrt_pixels = input_gradient(model, cover16, COVER)
    wrt_normalized = input_gradient(model, cover16, COVER, wrt="normalized")
    assert np.allclose(wrt_pixels * 255.0, wrt_normalized)
    assert np.array_equal(np.sign(wrt_pixels), np.sign(wrt_normalized))


def test_input_gradient_rejects_bad_arguments(cover16):
    with pytest.raises(InvariantViolation):
        input_gradient(_random_model(), cover16, 2)
    with pytest.raises(InvariantViolation):
        input_gradient(_random_model(), cover16, COVER, wrt="logits")


def _pairs(count=8, size=16):
    covers = [generate_cover(500 + i, size, size) for i in range(count)]
    stegos = [_stego(c, rate=0.4, seed=i)[2].stego for i, c in enumerate(covers)]
    return covers, stegos


def test_training_is_deterministic():
    covers, stegos = _pairs()
    settings = TrainSettings(batch_size=4)
    first = train_classifier(covers, stegos, epochs=2, seed=21, settings=settings)
    again = train_classifier(covers, stegos, epochs=2, seed=21, settings=settings)
    for a, b in zip(first.parameters(), again.parameters()):
        assert np.array_equal(a, b)
    assert first.validation_accuracy == again.validation_accuracy


def test_training_does_not_warn_about_grad_tensors(recwarn):
    covers, stegos = _pairs(4)
    train_classifier(covers, stegos, epochs=1, seed=3, settings=TrainSettings(batch_size=2))
    assert not [w for w in recwarn if "requires_grad" in str(w.message)]


def test_identical_sets_cannot_be_separated():
    covers, _ = _pairs(6)
    model = train_classifier(covers, covers, epochs=1, seed=2, settings=TrainSettings(batch_size=4))
    assert model.validation_accuracy == 0.5


def test_training_rejects_unpaired_sets():
    covers, stegos = _pairs(4)
    with pytest.raises(InvariantViolation):
        train_classifier(covers, stegos[:3], epochs=1, seed=0)
    with pytest.raises(InvariantViolation):
        train_classifier([], [], epochs=1, seed=0)


def test_model_file_round_trip(tmp_path):
    model = _random_model()
    model.quantize()
    model.epochs, model.seed, model.validation_accuracy = 3, 99, 0.75
    save_model(model, tmp_path / "m.stgm")
    loaded = load_model(tmp_path / "m.stgm")
    assert loaded.input_size == (16, 16)
    assert (loaded.epochs, loaded.seed, loaded.validation_accuracy) == (3, 99, 0.75)
    for a, b in zip(model.parameters(), loaded.parameters()):
        assert np.array_equal(a, b)


def test_model_file_errors():
    data = encode_model(_random_model())
    with pytest.raises(ImageFormatError):
        decode_model(b"XXXX" + data[4:])
    with pytest.raises(ImageFormatError):
        decode_model(data[:-4])
    with pytest.raises(ImageFormatError):
        decode_model(data[:10])


def test_intensity_grid():
    assert intensity_grid(0.1, 10.0) == list(range(1, 100))
    assert intensity_grid(0.5, 1.0) == [1]
    assert intensity_grid(5.0, 3.0) == [1]
    with pytest.raises(InvariantViolation):
        intensity_grid(0.0, 1.0)


def test_adversarial_costs_skew_against_gradient(rng):
    plus, minus = rng.uniform(1, 5, (6, 6)), rng.uniform(1, 5, (6, 6))
    plus[0, 0] = WET_VALUE
    minus[1, 1] = WET_VALUE
    adjusted = CostMap(plus, minus)
    gradient = rng.normal(size=(6, 6))
    gradient[2, 2] = 0.0
    one = adversarial_costs(adjusted, gradient, 1, 0.5)
    two = adversarial_costs(adjusted, gradient, 2, 0.5)

    dry = ~(adjusted.wet_plus | adjusted.wet_minus)
    assert np.allclose((one.rho_plus * one.rho_minus)[dry], (plus * minus)[dry])
    up = (gradient > 0) & dry
    assert np.all(two.rho_plus[up] > one.rho_plus[up])
    assert np.all(two.rho_minus[up] < one.rho_minus[up])
    assert np.allclose(one.rho_plus[up], plus[up] * 1.5)
    assert one.rho_plus[2, 2] == plus[2, 2] and one.rho_minus[2, 2] == minus[2, 2]
    assert one.rho_plus[0, 0] == WET_VALUE and two.rho_minus[1, 1] == WET_VALUE


def test_adversarial_costs_reject_bad_arguments():
    adjusted = CostMap.symmetric(np.ones((4, 4)))
    with pytest.raises(DimensionMismatch):
        adversarial_costs(adjusted, np.ones((2, 2)), 1, 0.1)
    with pytest.raises(InvariantViolation):
        adversarial_costs(adjusted, np.ones((4, 4)), 0, 0.1)


def test_attack_returns_immediately_when_stego_already_passes(cover16):
    _, message, result = _stego(cover16)
    outcome = ite_syn_attack(
        constant_model(3.0), cover16, message, result.stego, result.final_costs,
        AdvConfig(seed=1), EmbedConfig(payload_rate=0.3, seed=1),
    )
    assert outcome.succeeded and outcome.gamma_used == 0.0
    assert outcome.reembeds == 0 and outcome.adversarial_stego == result.stego


def test_failed_attack_transmits_the_stego(cover16):
    cfg, message, result = _stego(cover16)
    adv = AdvConfig(seed=2)
    outcome = ite_syn_attack(constant_model(-3.0), cover16, message, result.stego, result.final_costs, adv, cfg)
    assert not outcome.succeeded and outcome.gamma_used is None
    assert outcome.adversarial_stego == result.stego
    assert outcome.reembeds == adv.max_reembeds == 396
    assert outcome.sublattices_tried == 4


@pytest.mark.parametrize("seed", [4, 5])
def test_attack_keeps_the_message_readable(cover16, seed):
    cfg, message, result = _stego(cover16, coder="stc", seed=seed)
    model = nudge_to_threshold(_random_model(seed=seed), result.stego)
    assert classify(model, result.stego) == STEGO
    adv = AdvConfig(delta_gamma=0.5, gamma_max=5.0, seed=seed)
    outcome = ite_syn_attack(model, cover16, message, result.stego, result.final_costs, adv, cfg)
    z = outcome.adversarial_stego
    assert extract_synchronized(z, message.length, cfg.stc_params) == message
    assert verify_noise_identity(cover16, result.stego, z)
    assert outcome.reembeds <= adv.max_reembeds
    if outcome.succeeded:
        assert classify(model, z) == COVER
        assert outcome.gamma_used in [k * adv.delta_gamma for k in adv.intensities]
    else:
        assert z == result.stego


def test_adv_config_validation():
    with pytest.raises(InvariantViolation):
        AdvConfig(delta_gamma=2.0, gamma_max=1.0)
    with pytest.raises(InvariantViolation):
        AdvConfig(delta_gamma=-0.1)
    assert AdvConfig().max_reembeds == 396


def test_adversarial_costs_literal_values():
    skewed = adversarial_costs(CostMap(np.array([[2.0]]), np.array([[4.0]])), np.array([[1.0]]), 3, 0.1)
    assert skewed.rho_plus[0, 0] == pytest.approx(2.6)
    assert skewed.rho_minus[0, 0] == pytest.approx(4.0 / 1.3)
    skewed = adversarial_costs(CostMap.symmetric(np.array([[1.1]])), np.array([[-1.0]]), 1, 0.1)
    assert skewed.rho_plus[0, 0] == pytest.approx(1.0)
    assert skewed.rho_minus[0, 0] == pytest.approx(1.21)


def test_attack_computes_the_gradient_once(cover16, monkeypatch):
    cfg, message, result = _stego(cover16)
    calls = []

    def counting_gradient(*args, **kwargs):
        calls.append(args[2])
        return input_gradient(*args, **kwargs)

    monkeypatch.setattr(attack_module, "input_gradient", counting_gradient)
    outcome = ite_syn_attack(
        constant_model(-3.0), cover16, message, result.stego, result.final_costs, AdvConfig(seed=2), cfg
    )
    assert outcome.reembeds == 396
    assert calls == [COVER]


def test_successful_attack_changes_one_sublattice(cover16, monkeypatch):
    cfg, message, result = _stego(cover16, coder="stc", seed=4)
    scores = iter([0.4, 0.45, 0.6])
    monkeypatch.setattr(attack_module, "classifier_forward", lambda model, img: next(scores))
    adv = AdvConfig(delta_gamma=0.5, gamma_max=1.0, seed=6)
    outcome = ite_syn_attack(_random_model(), cover16, message, result.stego, result.final_costs, adv, cfg)

    order = traversal_order(random_start(generator(adv.seed, ATTACK_START_STREAM)))
    assert outcome.succeeded and outcome.gamma_used == 0.5
    assert outcome.sublattices_tried == outcome.reembeds == 2
    assert outcome.lattice == order.lattices[1]
    changed = outcome.adversarial_stego.as_int() != result.stego.as_int()
    assert not np.any(changed & ~outcome.lattice.mask(cover16.shape))
    assert extract_synchronized(outcome.adversarial_stego, message.length, cfg.stc_params) == message


def test_trained_gradient_matches_finite_differences(cover16):
    covers, stegos = _pairs()
    model = train_classifier(covers, stegos, epochs=2, seed=13, settings=TrainSettings(batch_size=4))
    grad = input_gradient(model, cover16, COVER, wrt="normalized")
    x = cover16.pixels.astype(np.float64) / 255.0 - 0.5
    eps = 1e-6
    picks = np.random.default_rng(100).choice(x.size, size=100, replace=False)
    for i, j in zip(*np.unravel_index(picks, x.shape)):
        up, down = x.copy(), x.copy()
        up[i, j] += eps
        down[i, j] -= eps
        numeric = (normalized_loss(model, up, COVER) - normalized_loss(model, down, COVER)) / (2 * eps)
        assert grad[i, j] == pytest.approx(numeric, rel=1e-4, abs=1e-8)


def test_zero_network_has_zero_gradient(cover16):
    model = _random_model()
    with torch.no_grad():
        for p in model.network.parameters():
            p.zero_()
    assert classifier_forward(model, cover16) == pytest.approx(0.5)
    assert np.all(input_gradient(model, cover16, COVER) == 0.0)
    assert np.all(input_gradient(model, cover16, STEGO) == 0.0)


def test_cover_and_stego_gradients_point_opposite_ways(cover16):
    model = _random_model(seed=8)
    phi = classifier_forward(model, cover16)
    towards_cover = input_gradient(model, cover16, COVER)
    towards_stego = input_gradient(model, cover16, STEGO)
    # two-class cross-entropy: d/dx is (1 - phi) * v for cover and -phi * v for stego
    scale = float(np.abs(towards_cover).max())
    assert scale > 0
    assert np.allclose(towards_cover * phi, -towards_stego * (1.0 - phi), rtol=1e-9, atol=1e-12 * scale)
    clear = np.abs(towards_cover) > 1e-6 * scale
    assert np.array_equal(np.sign(towards_cover[clear]), -np.sign(towards_stego[clear]))


def test_trained_classifier_scores_covers_higher():
    rng = np.random.default_rng(31)
    covers = [generate_cover(700 + i, 16, 16) for i in range(16)]
    stegos = []
    for c in covers:
        inside = (c.as_int() > 2) & (c.as_int() < 253)
        stegos.append(c.with_changes(rng.choice([-2, 2], size=c.shape) * inside))
    model = train_classifier(covers, stegos, epochs=8, seed=5, settings=TrainSettings(batch_size=4))
    assert cover_probabilities(model, covers).mean() > cover_probabilities(model, stegos).mean()
