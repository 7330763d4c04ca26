from __future__ import annotations

from pathlib import Path

from domain.coding.message import BitMessage


def read_message(path: Path | str, bits: int) -> BitMessage:
    """First `bits` bits of the file, MSB-first."""
    return BitMessage.from_bytes(Path(path).read_bytes(), bits)


def write_message(message: BitMessage, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(message.to_bytes())
