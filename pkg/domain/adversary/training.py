from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch
import torch.nn.functional as F

from domain.adversary.network import COVER, STEGO, THRESHOLD, ClassifierModel, StegoNet, as_batch
from domain.common.errors import DimensionMismatch, InvariantViolation
from domain.common.seeding import check_seed, derive_seed, generator
from domain.image.model import GrayImage

logger = logging.getLogger(__name__)

INIT_STREAM = 11
SHUFFLE_STREAM = 12
HOLDOUT_STREAM = 13

# first-layer gain: KV residuals of normalized inputs are small
RESIDUAL_GAIN = 16.0


@dataclass(frozen=True)
class TrainSettings:
    batch_size: int = 32
    learning_rate: float = 0.05
    momentum: float = 0.9
    validation_fraction: float = 0.1

    def __post_init__(self):
        if self.batch_size < 1:
            raise InvariantViolation("batch_size must be at least 1")
        if self.learning_rate <= 0 or not 0 <= self.momentum < 1:
            raise InvariantViolation("learning_rate must be positive and momentum in [0, 1)")
        if not 0 < self.validation_fraction < 1:
            raise InvariantViolation("validation_fraction must lie in (0, 1)")


def _torch_generator(seed: int, stream: int) -> torch.Generator:
    return torch.Generator().manual_seed(derive_seed(seed, stream) >> 1)


def init_network(seed: int) -> StegoNet:
    """Seeded initialization, independent of torch's global generator."""
    net = StegoNet()
    g = _torch_generator(seed, INIT_STREAM)
    with torch.no_grad():
        for layer, gain in ((net.conv1, RESIDUAL_GAIN), (net.conv2, 1.0), (net.fc, 1.0)):
            fan_in = layer.weight[0].numel()
            noise = torch.randn(layer.weight.shape, generator=g, dtype=torch.float64)
            layer.weight.copy_(noise * gain / np.sqrt(fan_in))
            layer.bias.zero_()
    return net


def _labelled(covers: Sequence[GrayImage], stegos: Sequence[GrayImage]) -> tuple[torch.Tensor, torch.Tensor]:
    x = as_batch(list(covers) + list(stegos))
    y = torch.tensor([COVER] * len(covers) + [STEGO] * len(stegos), dtype=torch.int64)
    return x, y


def accuracy(net: StegoNet, x: torch.Tensor, y: torch.Tensor) -> float:
    if len(y) == 0:
        return 0.0
    net.eval()
    with torch.no_grad():
        phi = torch.softmax(net(x), dim=1)[:, COVER]
    predicted = torch.where(phi >= THRESHOLD, COVER, STEGO)
    return float((predicted == y).double().mean())


def _check_sets(covers: Sequence[GrayImage], stegos: Sequence[GrayImage]) -> tuple[int, int]:
    if not covers or not stegos:
        raise InvariantViolation("Training needs non-empty cover and stego sets")
    if len(covers) != len(stegos):
        raise InvariantViolation(f"{len(covers)} covers but {len(stegos)} stegos; sets must be paired")
    shape = covers[0].shape
    for img in list(covers) + list(stegos):
        if img.shape != shape:
            raise DimensionMismatch(f"Mixed image sizes {shape} and {img.shape}")
    return shape


def train_classifier(
    covers: Sequence[GrayImage],
    stegos: Sequence[GrayImage],
    epochs: int,
    seed: int,
    settings: TrainSettings = TrainSettings(),
    validation: tuple[Sequence[GrayImage], Sequence[GrayImage]] | None = None,
) -> ClassifierModel:
    """
    Mini-batch SGD with momentum on cross-entropy. Keeps the parameters of the
    epoch with the best validation accuracy. Without an explicit validation set,
    a seeded share of the cover/stego pairs is held out.
    """
    covers, stegos = list(covers), list(stegos)
    shape = _check_sets(covers, stegos)
    check_seed(seed)
    if epochs < 0:
        raise InvariantViolation(f"epochs must be non-negative, got {epochs}")

    if validation is None:
        pairs = generator(seed, HOLDOUT_STREAM).permutation(len(covers))
        held = int(round(settings.validation_fraction * len(covers))) if len(covers) > 1 else 0
        held = min(max(held, 1), len(covers) - 1) if len(covers) > 1 else 0
        val_idx, train_idx = pairs[:held], pairs[held:]
        val_covers = [covers[i] for i in val_idx] or covers
        val_stegos = [stegos[i] for i in val_idx] or stegos
        covers = [covers[i] for i in train_idx]
        stegos = [stegos[i] for i in train_idx]
    else:
        val_covers, val_stegos = (list(part) for part in validation)
        _check_sets(val_covers, val_stegos)

    x, y = _labelled(covers, stegos)
    x_val, y_val = _labelled(val_covers, val_stegos)

    net = init_network(seed)
    optimizer = torch.optim.SGD(net.parameters(), lr=settings.learning_rate, momentum=settings.momentum)
    shuffle = _torch_generator(seed, SHUFFLE_STREAM)

    best_accuracy = accuracy(net, x_val, y_val)
    best_state = [p.detach().clone() for p in net.parameters()]
    for epoch in range(1, epochs + 1):
        net.train()
        order = torch.randperm(len(y), generator=shuffle)
        total = 0.0
        for start in range(0, len(y), settings.batch_size):
            batch = order[start:start + settings.batch_size]
            optimizer.zero_grad()
            loss = F.cross_entropy(net(x[batch]), y[batch])
            loss.backward()
            optimizer.step()
            total += loss.item() * len(batch)
        val_accuracy = accuracy(net, x_val, y_val)
        logger.info("epoch %d/%d loss=%.4f val_acc=%.3f", epoch, epochs, total / len(y), val_accuracy)
        if val_accuracy > best_accuracy:
            best_accuracy = val_accuracy
            best_state = [p.detach().clone() for p in net.parameters()]

    with torch.no_grad():
        for p, best in zip(net.parameters(), best_state):
            p.copy_(best)
    model = ClassifierModel(network=net, input_size=shape, epochs=epochs, seed=seed)
    model.quantize()
    model.validation_accuracy = accuracy(model.network, x_val, y_val)
    return model
