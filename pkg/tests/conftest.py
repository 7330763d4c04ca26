import numpy as np
import pytest
import torch

from domain.adversary.network import ClassifierModel, as_batch
from domain.adversary.training import init_network
from domain.image.model import GrayImage
from domain.image.synthetic import generate_cover


@pytest.fixture(scope="session")
def cover64() -> GrayImage:
    return generate_cover(7, 64, 64)


@pytest.fixture(scope="session")
def cover16() -> GrayImage:
    return generate_cover(3, 16, 16)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def constant_image(value: int, size: int = 8) -> GrayImage:
    return GrayImage(np.full((size, size), value, dtype=np.uint8))


def constant_model(cover_logit: float, size: int = 16, seed: int = 0) -> ClassifierModel:
    """A network whose output ignores the image: logits are (0, cover_logit)."""
    net = init_network(seed)
    with torch.no_grad():
        net.fc.weight.zero_()
        net.fc.bias.copy_(torch.tensor([0.0, cover_logit], dtype=torch.float64))
    return ClassifierModel(network=net, input_size=(size, size))


def nudge_to_threshold(model: ClassifierModel, img: GrayImage, margin: float = 0.04) -> ClassifierModel:
    """Shift the cover bias so `img` scores just below the decision threshold."""
    with torch.no_grad():
        logits = model.network(as_batch([img]))[0]
        model.network.fc.bias[1] -= float(logits[1] - logits[0]) + margin
    return model
