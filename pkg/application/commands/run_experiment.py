from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class RunExperiment:
    """
    Application command.
    Full pipeline from a config file into one run directory.
    """
    config_path: Path
    run_dir: Path
