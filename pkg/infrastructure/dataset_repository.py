"""
Dataset manifest: one "<id> <path> <split>" line per image, paths relative to
the manifest. A leading "# seed=<n>" line records the split seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from domain.common.errors import ConfigError
from domain.image.dataset import SPLIT_NAMES, DatasetSplit
from domain.image.model import GrayImage
from infrastructure.pgm_repository import load_image


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    path: str
    split: str


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]
    seed: int
    root: Path

    def ids(self, split: str) -> tuple[str, ...]:
        return tuple(e.image_id for e in self.entries if e.split == split)

    def to_split(self) -> DatasetSplit:
        return DatasetSplit(
            train=self.ids("train"),
            validation=self.ids("validation"),
            test=self.ids("test"),
            seed=self.seed,
        )

    def path_of(self, image_id: str) -> Path:
        for e in self.entries:
            if e.image_id == image_id:
                return self.root / e.path
        raise ConfigError(f"Image id {image_id!r} is not in the manifest")

    def load(self, image_id: str) -> GrayImage:
        return load_image(self.path_of(image_id))


def write_manifest(path: Path | str, split: DatasetSplit, paths: dict[str, str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# seed={split.seed}"]
    for name in SPLIT_NAMES:
        for image_id in getattr(split, name):
            lines.append(f"{image_id} {paths[image_id]} {name}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(path: Path | str) -> Manifest:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Manifest not found: {path}")
    seed = 0
    entries: list[ManifestEntry] = []
    for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key.strip() == "seed":
                try:
                    seed = int(value)
                except ValueError:
                    raise ConfigError(f"{path}:{number}: malformed seed {value!r}") from None
            continue
        parts = line.split()
        if len(parts) != 3 or parts[2] not in SPLIT_NAMES:
            raise ConfigError(f"{path}:{number}: expected '<id> <path> <split>', got {raw!r}")
        entries.append(ManifestEntry(*parts))
    manifest = Manifest(tuple(entries), seed, path.parent)
    manifest.to_split()
    return manifest
