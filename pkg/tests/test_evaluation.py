import math

import numpy as np
import pytest

from domain.adversary.attack import AttackOutcome
from domain.adversary.network import ClassifierModel
from domain.adversary.training import init_network
from domain.coding.message import ChangeMap
from domain.common.errors import DimensionMismatch, InvariantViolation
from domain.evaluation.campaign import AttackRecord, AttackReport, gamma_cdf
from domain.evaluation.metrics import (
    DetectionReport,
    clustering_sign_test,
    compute_pe,
    direction_agreement,
    evaluate_classifier,
    verify_noise_identity,
)
from domain.image.model import GrayImage
from domain.image.synthetic import generate_cover
from tests.conftest import constant_image, constant_model


def _outcome(gamma, reembeds=1):
    img = constant_image(50)
    return AttackOutcome(img, gamma is not None, gamma, 1, reembeds, 0.2, 0.6 if gamma is not None else 0.2)


@pytest.mark.parametrize(
    "p_fa, p_md, expected",
    [(0.0, 0.0, 0.0), (1.0, 0.0, 0.5), (0.2, 0.4, 0.3), (1.0, 1.0, 1.0)],
)
def test_compute_pe(p_fa, p_md, expected):
    assert compute_pe(p_fa, p_md) == pytest.approx(expected)


def test_compute_pe_rejects_rates_outside_unit_interval():
    with pytest.raises(InvariantViolation):
        compute_pe(1.2, 0.0)


def test_detection_report_invariants():
    report = DetectionReport.from_rates(0.1, 0.3, 10, 10)
    assert report.accuracy == pytest.approx(0.8)
    with pytest.raises(InvariantViolation):
        DetectionReport(0.1, 0.3, 0.5, 10, 10)


def test_always_cover_model():
    covers = [generate_cover(i, 16, 16) for i in range(3)]
    stegos = [generate_cover(10 + i, 16, 16) for i in range(4)]
    report = evaluate_classifier(constant_model(4.0), covers, stegos)
    assert (report.p_fa, report.p_md, report.p_e) == (0.0, 1.0, 0.5)
    assert (report.n_cover, report.n_stego) == (3, 4)


def test_identical_sets_have_complementary_rates():
    images = [generate_cover(i, 16, 16) for i in range(5)]
    model = ClassifierModel(network=init_network(3), input_size=(16, 16))
    report = evaluate_classifier(model, images, images)
    assert report.p_fa + report.p_md == pytest.approx(1.0)
    assert report.p_e == pytest.approx(0.5)


def test_evaluate_needs_both_sets():
    with pytest.raises(InvariantViolation):
        evaluate_classifier(constant_model(1.0), [], [generate_cover(1, 16, 16)])


def test_gamma_cdf_examples():
    outcomes = [_outcome(0.0), _outcome(0.2), _outcome(0.2), _outcome(None)]
    curve = gamma_cdf(outcomes, delta_gamma=0.1, gamma_max=0.3)
    assert [round(g, 10) for g, _ in curve] == [0.0, 0.1, 0.2, 0.3]
    assert [pct for _, pct in curve] == [25.0, 25.0, 75.0, 75.0]
    assert gamma_cdf([], 0.1, 0.2) == [(0.0, 0.0), (0.1, 0.0), (0.2, 0.0)]


def test_gamma_cdf_is_monotone():
    rng = np.random.default_rng(3)
    outcomes = [_outcome(None if rng.random() < 0.3 else 0.1 * int(rng.integers(0, 100))) for _ in range(50)]
    pcts = [pct for _, pct in gamma_cdf(outcomes)]
    assert all(a <= b for a, b in zip(pcts, pcts[1:]))
    assert pcts[-1] == pytest.approx(100.0 * sum(o.succeeded for o in outcomes) / 50)


def test_attack_report_from_records():
    records = [
        AttackRecord("c00001", 0.4, "sim", _outcome(0.3, 3), 1.0),
        AttackRecord("c00002", 0.4, "sim", _outcome(None, 396), 3.0),
        AttackRecord("c00003", 0.4, "sim", _outcome(0.0, 0), 2.0),
    ]
    report = AttackReport.from_records(records, 0.1)
    assert (report.total, report.succeeded) == (3, 2)
    assert report.success_percent == pytest.approx(200 / 3)
    assert report.gamma_histogram == {0: 1, 3: 1}
    assert report.reembed_counts == {0: 1, 3: 1, 396: 1}
    assert (report.min_seconds, report.max_seconds, report.mean_seconds) == (1.0, 3.0, 2.0)
    assert records[1].as_row()["gamma_used"] == ""


def test_attack_report_rejects_inconsistent_counts():
    with pytest.raises(InvariantViolation):
        AttackReport(total=2, succeeded=1, success_rate=0.4)
    with pytest.raises(InvariantViolation):
        AttackReport(total=2, succeeded=1, success_rate=0.5, gamma_histogram={1: 2})


def test_outcome_requires_gamma_exactly_on_success():
    with pytest.raises(InvariantViolation):
        AttackOutcome(constant_image(1), True, None, 1, 1, 0.1, 0.6)


def test_direction_agreement():
    assert math.isnan(direction_agreement(ChangeMap.zeros((4, 4))))
    delta = np.zeros((4, 4), dtype=int)
    delta[0, 0:3] = [1, 1, -1]
    delta[1, 0] = 1
    # pairs: (0,0)-(0,1) same, (0,1)-(0,2) opposite, (0,0)-(1,0) same
    assert direction_agreement(ChangeMap(delta)) == pytest.approx(2 / 3)


def test_noise_identity():
    cover = constant_image(100)
    stego = cover.with_changes(np.eye(8, dtype=int))
    adversarial = cover.with_changes(-np.eye(8, dtype=int))
    assert verify_noise_identity(cover, stego, adversarial)
    with pytest.raises(DimensionMismatch):
        verify_noise_identity(cover, stego, GrayImage(np.zeros((4, 4), dtype=np.uint8)))


def test_clustering_sign_test():
    result = clustering_sign_test([0.9] * 10 + [float("nan")], [0.5] * 10 + [0.5])
    assert (result.wins, result.losses, result.ties) == (10, 0, 0)
    assert result.p_value == pytest.approx(0.5 ** 10)
    assert clustering_sign_test([0.5, 0.5], [0.5, 0.5]).p_value == 1.0
    with pytest.raises(DimensionMismatch):
        clustering_sign_test([0.1], [0.1, 0.2])
