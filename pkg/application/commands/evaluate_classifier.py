from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class EvaluateClassifier:
    """
    Application command.
    Detection error of a saved model on cover / stego directories.
    """
    model_path: Path
    cover_dir: Path
    stego_dir: Path
