from __future__ import annotations

import logging
import sys
from pathlib import Path

LOG_FORMAT = "%(asctime)s - [%(levelname)s] - %(name)s - %(message)s"
CONSOLE_FORMAT = "%(message)s"

_OWNED = "_ite_syn_lab"


def configure_logging(*, verbose: bool = False, tee_path: Path | None = None) -> logging.Logger:
    """
    Console handler on stderr (WARNING, or DEBUG with --verbose) and, when
    tee_path is given, a full DEBUG log file next to the run artifacts.
    Calling it again replaces the handlers it installed before.
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, _OWNED, False):
            root.removeHandler(handler)
            handler.close()
    root.setLevel(logging.DEBUG)

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(logging.DEBUG if verbose else logging.WARNING)
    console.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    setattr(console, _OWNED, True)
    root.addHandler(console)

    if tee_path is not None:
        tee_path.parent.mkdir(parents=True, exist_ok=True)
        tee = logging.FileHandler(tee_path, mode="w", encoding="utf-8")
        tee.setLevel(logging.DEBUG)
        tee.setFormatter(logging.Formatter(LOG_FORMAT))
        setattr(tee, _OWNED, True)
        root.addHandler(tee)

    # font discovery floods DEBUG
    for noisy in ("matplotlib", "PIL"):
        logging.getLogger(noisy).setLevel(logging.WARNING)
    return root
