from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class ExtractMessage:
    """
    Application command.
    Recover `bits` message bits from an STC stego.
    """
    stego_path: Path
    bits: int
    stc_h: int = 10
    plain: bool = False
    out_path: Path | None = None
