"""
Miniature differentiable steganalyzer.

Fixed KV high-pass residual, conv 8x5x5 + |.| + tanh + 2x mean-pool,
conv 16x3x3 + tanh + 2x mean-pool, global mean, linear to two logits.
Logit 0 is the stego class and logit 1 the cover class, so a class label
doubles as the logit index.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from domain.common.errors import DimensionMismatch, InvariantViolation
from domain.image.model import GrayImage

logger = logging.getLogger(__name__)

ARCH_TAG = "kv8x5-16x3-v1"
STEGO = 0
COVER = 1
THRESHOLD = 0.5

KV_KERNEL = np.array([
    [-1, 2, -2, 2, -1],
    [2, -6, 8, -6, 2],
    [-2, 8, -12, 8, -2],
    [2, -6, 8, -6, 2],
    [-1, 2, -2, 2, -1],
], dtype=np.float64) / 12.0


def normalize(pixels: torch.Tensor) -> torch.Tensor:
    return pixels / 255.0 - 0.5


class StegoNet(nn.Module):
    def __init__(self):
        super().__init__()
        self.register_buffer("kv", torch.tensor(KV_KERNEL, dtype=torch.float64).view(1, 1, 5, 5))
        self.conv1 = nn.Conv2d(1, 8, kernel_size=5, padding=2, dtype=torch.float64)
        self.conv2 = nn.Conv2d(8, 16, kernel_size=3, padding=1, dtype=torch.float64)
        self.pool = nn.AvgPool2d(2)
        self.fc = nn.Linear(16, 2, dtype=torch.float64)

    def forward_normalized(self, x: torch.Tensor) -> torch.Tensor:
        residual = F.conv2d(x, self.kv, padding=2)
        h = self.pool(torch.tanh(torch.abs(self.conv1(residual))))
        h = self.pool(torch.tanh(self.conv2(h)))
        return self.fc(h.mean(dim=(2, 3)))

    def forward(self, pixels: torch.Tensor) -> torch.Tensor:
        """Logits for a (N, 1, H, W) batch in pixel units."""
        return self.forward_normalized(normalize(pixels))


def parameter_shapes() -> list[tuple[str, tuple[int, ...]]]:
    return [(name, tuple(p.shape)) for name, p in StegoNet().named_parameters()]


@dataclass
class ClassifierModel:
    """
    A trained (or initialized) network plus the metadata saved with it.
    """
    network: StegoNet
    input_size: tuple[int, int]
    epochs: int = 0
    seed: int = 0
    validation_accuracy: float = 0.0
    arch: str = ARCH_TAG

    def __post_init__(self):
        if self.arch != ARCH_TAG:
            raise InvariantViolation(f"Unsupported architecture {self.arch!r}; expected {ARCH_TAG!r}")
        height, width = self.input_size
        if height < 4 or width < 4:
            raise InvariantViolation(f"Input size {self.input_size} is too small")
        self.input_size = (int(height), int(width))
        self.network.eval()

    def check_input(self, img: GrayImage) -> None:
        if img.shape != self.input_size:
            raise DimensionMismatch(
                f"Model expects {self.input_size[1]}x{self.input_size[0]} images, got {img.width}x{img.height}"
            )

    def parameters(self) -> list[np.ndarray]:
        return [p.detach().cpu().numpy().copy() for p in self.network.parameters()]

    def load_parameters(self, arrays: list[np.ndarray]) -> None:
        params = list(self.network.parameters())
        if len(arrays) != len(params):
            raise InvariantViolation(f"Expected {len(params)} parameter tensors, got {len(arrays)}")
        with torch.no_grad():
            for p, a in zip(params, arrays):
                if tuple(p.shape) != tuple(np.shape(a)):
                    raise InvariantViolation(f"Parameter shape {np.shape(a)} does not match {tuple(p.shape)}")
                p.copy_(torch.as_tensor(np.asarray(a, dtype=np.float64)))

    def quantize(self) -> None:
        """Round parameters to float32, the precision of the model file."""
        self.load_parameters([a.astype(np.float32).astype(np.float64) for a in self.parameters()])


def as_batch(images) -> torch.Tensor:
    stack = np.stack([img.pixels for img in images]).astype(np.float64)
    return torch.from_numpy(stack).unsqueeze(1)


def cover_probabilities(model: ClassifierModel, images) -> np.ndarray:
    images = list(images)
    for img in images:
        model.check_input(img)
    if not images:
        return np.zeros(0)
    with torch.no_grad():
        logits = model.network(as_batch(images))
        return torch.softmax(logits, dim=1)[:, COVER].numpy()


def classifier_forward(model: ClassifierModel, img: GrayImage) -> float:
    """Cover-class probability of one image."""
    return float(cover_probabilities(model, [img])[0])


def classify(model: ClassifierModel, img: GrayImage) -> int:
    return COVER if classifier_forward(model, img) >= THRESHOLD else STEGO


def input_gradient(model: ClassifierModel, img: GrayImage, label: int, wrt: str = "pixels") -> np.ndarray:
    """
    Gradient of the cross-entropy against `label` with respect to the input grid,
    in pixel units or with respect to the normalized input.
    """
    model.check_input(img)
    if label not in (COVER, STEGO):
        raise InvariantViolation(f"Label must be {COVER} (cover) or {STEGO} (stego), got {label}")
    pixels = as_batch([img])
    if wrt == "pixels":
        x = pixels.clone().requires_grad_(True)
        logits = model.network(x)
    elif wrt == "normalized":
        x = normalize(pixels).requires_grad_(True)
        logits = model.network.forward_normalized(x)
    else:
        raise InvariantViolation(f"wrt must be 'pixels' or 'normalized', got {wrt!r}")
    loss = F.cross_entropy(logits, torch.tensor([label]))
    (grad,) = torch.autograd.grad(loss, x)
    return grad[0, 0].numpy().copy()


def normalized_loss(model: ClassifierModel, x: np.ndarray, label: int) -> float:
    """Loss at a normalized input grid; the finite-difference counterpart of input_gradient."""
    with torch.no_grad():
        u = torch.as_tensor(np.asarray(x, dtype=np.float64)).view(1, 1, *np.shape(x))
        logits = model.network.forward_normalized(u)
        return float(F.cross_entropy(logits, torch.tensor([label])))
