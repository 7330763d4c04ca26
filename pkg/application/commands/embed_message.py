from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class EmbedMessage:
    """
    Application command.
    Hide the first `bits` bits of a message file in a cover.
    Exactly one of `bits` and `payload_rate` is given.
    """
    cover_path: Path
    message_path: Path
    out_path: Path
    seed: int
    bits: int | None = None
    payload_rate: float | None = None
    scheme: str = "hill"
    coder: str = "sim"
    stc_h: int = 10
    beta: float = 10.0
    neighborhood: str = "cross"
    plain: bool = False
    costs_path: Path | None = None
    dump_costs: Path | None = None
