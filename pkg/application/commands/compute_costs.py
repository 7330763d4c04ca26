from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class ComputeCosts:
    """
    Application command.
    Compute the cost map of one cover with a named scheme.
    """
    cover_path: Path
    out_path: Path
    scheme: str = "hill"
