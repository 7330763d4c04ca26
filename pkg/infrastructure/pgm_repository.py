from __future__ import annotations

from pathlib import Path

import numpy as np

from domain.common.errors import ImageFormatError, InvariantViolation
from domain.image.model import GrayImage, MAX_INTENSITY

MAGIC = b"P5"
_WHITESPACE = b" \t\r\n\v\f"


def _header_fields(data: bytes) -> tuple[list[int], int]:
    """width, height, maxval and the offset of the first raster byte."""
    if not data.startswith(MAGIC):
        raise ImageFormatError("Not a binary PGM: magic must be P5")
    pos = len(MAGIC)
    fields: list[int] = []
    while len(fields) < 3:
        if pos >= len(data):
            raise ImageFormatError("Malformed header: file ends inside the header")
        byte = data[pos:pos + 1]
        if byte == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        if byte in _WHITESPACE:
            pos += 1
            continue
        if not byte.isdigit():
            raise ImageFormatError(f"Malformed header: unexpected byte {byte!r}")
        start = pos
        while pos < len(data) and data[pos:pos + 1].isdigit():
            pos += 1
        fields.append(int(data[start:pos]))
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise ImageFormatError("Malformed header: missing separator before the raster")
    return fields, pos + 1


def decode_pgm(data: bytes) -> GrayImage:
    (width, height, maxval), offset = _header_fields(data)
    if maxval != MAX_INTENSITY:
        raise ImageFormatError(f"maxval must be 255, got {maxval}")
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"Malformed header: size {width}x{height}")
    raster = data[offset:]
    expected = width * height
    if len(raster) < expected:
        raise ImageFormatError(f"Truncated payload: {len(raster)} of {expected} bytes")
    if len(raster) > expected:
        raise ImageFormatError(f"Trailing data: {len(raster) - expected} bytes after the raster")
    if width % 2 or height % 2:
        raise ImageFormatError(f"odd dimension: {width}x{height}")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    try:
        return GrayImage(pixels)
    except InvariantViolation as exc:
        raise ImageFormatError(str(exc)) from exc


def encode_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n{MAX_INTENSITY}\n".encode("ascii")
    return header + img.pixels.tobytes()


def load_image(path: Path | str) -> GrayImage:
    return decode_pgm(Path(path).read_bytes())


def save_image(img: GrayImage, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_pgm(img))


def load_directory(directory: Path | str) -> dict[str, GrayImage]:
    """Every *.pgm in `directory`, keyed by file stem, in sorted order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ImageFormatError(f"Not a directory: {directory}")
    return {p.stem: load_image(p) for p in sorted(directory.glob("*.pgm"))}
