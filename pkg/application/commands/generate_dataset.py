from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class GenerateDataset:
    """
    Application command.
    Write seeded synthetic covers and a split manifest.
    """
    out_dir: Path
    count: int
    size: int
    seed: int
    train: int
    validation: int
