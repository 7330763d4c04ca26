from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from domain.common.errors import ImageFormatError
from domain.cost.model import CostMap, WET_VALUE

MAGIC = b"COST"
_HEADER = struct.Struct("<4sII")
_F32 = np.dtype("<f4")


def encode_costs(costs: CostMap) -> bytes:
    header = _HEADER.pack(MAGIC, costs.width, costs.height)
    plus = costs.rho_plus.astype(_F32).tobytes()
    minus = costs.rho_minus.astype(_F32).tobytes()
    return header + plus + minus


def decode_costs(data: bytes) -> CostMap:
    """Planes are float32 on disk; entries that round from the wet value come back wet."""
    if len(data) < _HEADER.size:
        raise ImageFormatError("Cost file is shorter than its header")
    magic, width, height = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ImageFormatError(f"Not a cost map: magic {magic!r}")
    count = width * height
    body = data[_HEADER.size:]
    if len(body) != 2 * count * _F32.itemsize:
        raise ImageFormatError(
            f"Cost file holds {len(body)} payload bytes, expected {2 * count * _F32.itemsize}"
        )
    planes = np.frombuffer(body, dtype=_F32).astype(np.float64).reshape(2, height, width)
    wet_f32 = float(np.float32(WET_VALUE))
    planes = np.where(planes >= wet_f32, WET_VALUE, planes)
    return CostMap(planes[0], planes[1], WET_VALUE)


def save_costs(costs: CostMap, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_costs(costs))


def load_costs(path: Path | str) -> CostMap:
    return decode_costs(Path(path).read_bytes())
