from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from domain.adversary.network import ARCH_TAG, ClassifierModel, StegoNet
from domain.common.errors import ImageFormatError

MAGIC = b"STGM"
VERSION = 1
TAG_BYTES = 16
# magic, version, arch tag, epochs, seed, height, width, validation accuracy
_HEADER = struct.Struct(f"<4sI{TAG_BYTES}sIQIId")
_F32 = np.dtype("<f4")


def encode_model(model: ClassifierModel) -> bytes:
    height, width = model.input_size
    tag = model.arch.encode("ascii").ljust(TAG_BYTES, b"\0")
    header = _HEADER.pack(
        MAGIC, VERSION, tag, model.epochs, model.seed, height, width, model.validation_accuracy
    )
    params = b"".join(p.astype(_F32).tobytes() for p in model.parameters())
    return header + params


def decode_model(data: bytes) -> ClassifierModel:
    if len(data) < _HEADER.size:
        raise ImageFormatError("Model file is shorter than its header")
    magic, version, tag, epochs, seed, height, width, val_acc = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ImageFormatError(f"Not a model file: magic {magic!r}")
    if version != VERSION:
        raise ImageFormatError(f"Unsupported model file version {version}")
    arch = tag.rstrip(b"\0").decode("ascii", errors="replace")
    if arch != ARCH_TAG:
        raise ImageFormatError(f"Unsupported architecture {arch!r}")

    network = StegoNet()
    shapes = [tuple(p.shape) for p in network.parameters()]
    if (len(data) - _HEADER.size) % _F32.itemsize:
        raise ImageFormatError("Model parameters are not whole float32 values")
    body = np.frombuffer(data[_HEADER.size:], dtype=_F32)
    expected = sum(int(np.prod(s)) for s in shapes)
    if body.size != expected:
        raise ImageFormatError(f"Model file holds {body.size} parameters, expected {expected}")

    arrays, offset = [], 0
    for shape in shapes:
        size = int(np.prod(shape))
        arrays.append(body[offset:offset + size].astype(np.float64).reshape(shape))
        offset += size
    model = ClassifierModel(
        network=network,
        input_size=(height, width),
        epochs=epochs,
        seed=seed,
        validation_accuracy=val_acc,
        arch=arch,
    )
    model.load_parameters(arrays)
    return model


def save_model(model: ClassifierModel, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_model(model))


def load_model(path: Path | str) -> ClassifierModel:
    return decode_model(Path(path).read_bytes())
