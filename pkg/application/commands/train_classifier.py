from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class TrainClassifier:
    """
    Application command.
    Train a steganalyzer on paired cover / stego directories.
    """
    cover_dir: Path
    stego_dir: Path
    model_path: Path
    epochs: int
    seed: int
    batch_size: int = 32
    learning_rate: float = 0.05
    momentum: float = 0.9
