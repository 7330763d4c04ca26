from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class AttackStego:
    """
    Application command.
    Turn one stego into an adversarial stego against a saved model.
    Without `costs_path` the adjusted costs are rebuilt from the cover and stego.
    """
    model_path: Path
    cover_path: Path
    stego_path: Path
    message_path: Path
    bits: int
    out_path: Path
    seed: int
    delta_gamma: float = 0.1
    gamma_max: float = 10.0
    costs_path: Path | None = None
    scheme: str = "hill"
    coder: str = "sim"
    stc_h: int = 10
    beta: float = 10.0
    neighborhood: str = "cross"
