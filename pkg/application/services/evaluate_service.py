from application.commands.evaluate_classifier import EvaluateClassifier
from application.services.train_service import paired_images
from domain.evaluation.metrics import DetectionReport, evaluate_classifier
from infrastructure.model_repository import load_model


class EvaluateService:
    """
    Application Service reporting P_FA / P_MD / P_E of a saved model.
    """

    def execute(self, command: EvaluateClassifier) -> DetectionReport:
        model = load_model(command.model_path)
        covers, stegos = paired_images(command.cover_dir, command.stego_dir)
        return evaluate_classifier(model, covers, stegos)
