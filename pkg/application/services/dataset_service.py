from dataclasses import dataclass
from pathlib import Path

from application.commands.generate_dataset import GenerateDataset
from domain.common.errors import InvariantViolation
from domain.common.seeding import check_seed, derive_seed
from domain.image.dataset import DatasetSplit, make_split
from domain.image.synthetic import generate_cover
from infrastructure.dataset_repository import write_manifest
from infrastructure.pgm_repository import save_image

COVER_STREAM = 31
SPLIT_STREAM = 32
MANIFEST_NAME = "manifest.txt"


def cover_id(index: int) -> str:
    return f"c{index:05d}"


def cover_seed(seed: int, index: int) -> int:
    return derive_seed(seed, COVER_STREAM, index)


@dataclass(frozen=True)
class DatasetResult:
    manifest_path: Path
    split: DatasetSplit


class DatasetService:
    """
    Application Service writing a synthetic cover set.
    """

    def execute(self, command: GenerateDataset) -> DatasetResult:
        check_seed(command.seed)
        if command.count < 1:
            raise InvariantViolation("count must be at least 1")
        ids = [cover_id(i) for i in range(command.count)]
        split = make_split(
            ids,
            train=command.train,
            validation=command.validation,
            seed=derive_seed(command.seed, SPLIT_STREAM),
        )
        paths = {}
        for i, image_id in enumerate(ids):
            img = generate_cover(cover_seed(command.seed, i), command.size, command.size)
            rel = f"covers/{image_id}.pgm"
            save_image(img, command.out_dir / rel)
            paths[image_id] = rel
        manifest_path = command.out_dir / MANIFEST_NAME
        write_manifest(manifest_path, split, paths)
        return DatasetResult(manifest_path, split)
