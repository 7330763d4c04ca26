import logging

from application.commands.train_classifier import TrainClassifier
from domain.adversary.network import ClassifierModel
from domain.adversary.training import TrainSettings, train_classifier
from domain.common.errors import InvariantViolation
from domain.image.model import GrayImage
from infrastructure.model_repository import save_model
from infrastructure.pgm_repository import load_directory

logger = logging.getLogger(__name__)


def paired_images(cover_dir, stego_dir) -> tuple[list[GrayImage], list[GrayImage]]:
    """Covers and stegos matched by file name."""
    covers = load_directory(cover_dir)
    stegos = load_directory(stego_dir)
    if not covers or covers.keys() != stegos.keys():
        raise InvariantViolation(
            f"{cover_dir} and {stego_dir} must hold the same non-empty set of PGM names"
        )
    names = sorted(covers)
    return [covers[n] for n in names], [stegos[n] for n in names]


class TrainService:
    """
    Application Service for training and saving a steganalyzer.
    """

    def execute(self, command: TrainClassifier) -> ClassifierModel:
        settings = TrainSettings(
            batch_size=command.batch_size,
            learning_rate=command.learning_rate,
            momentum=command.momentum,
        )
        covers, stegos = paired_images(command.cover_dir, command.stego_dir)
        logger.info("training on %d cover/stego pairs", len(covers))
        model = train_classifier(covers, stegos, command.epochs, command.seed, settings)
        save_model(model, command.model_path)
        return model
