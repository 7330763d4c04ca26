"""
Desk-scale experiment: covers, costs, baseline stegos (plain and synchronized),
target steganalyzer and an independently seeded second one, the ITE-SYN
campaign on the test split, adversarial retraining, then CSVs, charts and a
PDF under one run directory.

Every random draw is derived from the config's master seed (covers from the
generator seed), so a single-worker run is reproducible file for file.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

import pandas as pd

from application.commands.generate_dataset import GenerateDataset
from application.commands.run_experiment import RunExperiment
from application.services.dataset_service import DatasetService
from domain.adversary.attack import AdvConfig, AttackOutcome, ite_syn_attack
from domain.adversary.network import COVER, ClassifierModel, classify
from domain.adversary.training import train_classifier
from domain.coding.message import BitMessage, ChangeMap
from domain.common.errors import DomainError, ExperimentStageError, InvariantViolation
from domain.common.seeding import derive_seed, generator
from domain.cost.model import CostMap
from domain.cost.schemes import cost_scheme
from domain.evaluation.campaign import AttackRecord, AttackReport, gamma_cdf
from domain.evaluation.metrics import (
    DetectionReport,
    SignTest,
    clustering_sign_test,
    direction_agreement,
    evaluate_classifier,
    verify_noise_identity,
)
from domain.image.dataset import DatasetSplit
from domain.image.model import GrayImage
from domain.syncdir.embedding import EmbedConfig, embed_plain, embed_synchronized, extract_synchronized
from infrastructure import report_writer as reports
from infrastructure.dataset_repository import read_manifest
from infrastructure.experiment_config import ExperimentConfig, load_config
from infrastructure.model_repository import save_model
from infrastructure.pgm_repository import save_image

logger = logging.getLogger(__name__)

MESSAGE_STREAM = 41
EMBED_STREAM = 42
TARGET_STREAM = 43
ATTACK_STREAM = 44
RETRAIN_STREAM = 45
INDEPENDENT_STREAM = 46

FOOLING_GATE = 0.80
ACCURACY_GATE = 0.65

MODE_CMD = "cmd"


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Re-raise any failure inside the block tagged with the stage name."""
    logger.info("stage %s", name)
    try:
        yield
    except ExperimentStageError:
        raise
    except (DomainError, OSError, ValueError, RuntimeError) as exc:
        raise ExperimentStageError(name, exc) from exc


@dataclass
class ImageCase:
    """Per-image state carried through the pipeline."""
    image_id: str
    index: int
    cover: GrayImage
    initial: CostMap
    message: BitMessage
    embed_cfg: EmbedConfig
    stego: GrayImage | None = None
    adjusted: CostMap | None = None
    plain: GrayImage | None = None


@dataclass(frozen=True)
class ExperimentResult:
    run_dir: Path
    config: ExperimentConfig
    target: DetectionReport
    target_plain: DetectionReport
    target_adversarial: DetectionReport
    independent_adversarial: DetectionReport
    attack: AttackReport
    retrained: DetectionReport | None
    clustering: SignTest
    gates: dict[str, bool]
    files: tuple[Path, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(self.gates.values())


class ExperimentService:
    """
    Application Service running the whole experiment pipeline.
    `progress` receives one short line per stage.
    """

    def __init__(self, progress: Callable[[str], None] | None = None):
        self._progress = progress or (lambda _line: None)

    def execute(self, command: RunExperiment) -> ExperimentResult:
        with stage("config"):
            cfg = load_config(command.config_path)
        run_dir = command.run_dir
        files: list[Path] = []

        self._progress("covers")
        with stage("covers"):
            split, covers = self._covers(cfg, run_dir)

        self._progress("costs")
        with stage("costs"):
            cases = self._cases(cfg, split, covers)

        self._progress("embed")
        with stage("embed"):
            for case in cases.values():
                self._embed(case, run_dir)
            clustering_rows = [
                {
                    "id": c.image_id,
                    "cmd_agreement": direction_agreement(ChangeMap.between(c.cover, c.stego)),
                    "plain_agreement": direction_agreement(ChangeMap.between(c.cover, c.plain)),
                }
                for c in cases.values()
            ]
            clustering = clustering_sign_test(
                [r["cmd_agreement"] for r in clustering_rows],
                [r["plain_agreement"] for r in clustering_rows],
            )

        train = [cases[i] for i in split.train]
        validation = [cases[i] for i in split.validation]
        test = [cases[i] for i in split.test]

        self._progress("train-target")
        with stage("train-target"):
            target = self._train(
                cfg,
                [c.cover for c in train],
                [c.stego for c in train],
                derive_seed(cfg.master_seed, TARGET_STREAM),
                ([c.cover for c in validation], [c.stego for c in validation]) if validation else None,
            )
            files.append(_saved_model(target, run_dir / "models" / "target.stgm"))
            target_report = evaluate_classifier(target, [c.cover for c in test], [c.stego for c in test])
            plain_report = evaluate_classifier(target, [c.cover for c in test], [c.plain for c in test])
            logger.info("target accuracy %.3f on %d test pairs", target_report.accuracy, len(test))

        self._progress("train-independent")
        with stage("train-independent"):
            independent = self._train(
                cfg,
                [c.cover for c in train],
                [c.stego for c in train],
                derive_seed(cfg.master_seed, INDEPENDENT_STREAM),
                ([c.cover for c in validation], [c.stego for c in validation]) if validation else None,
            )
            files.append(_saved_model(independent, run_dir / "models" / "independent.stgm"))

        self._progress("attack")
        with stage("attack"):
            records = self._campaign(cfg, target, test, run_dir / "images" / "adversarial")
            adversarial = [r.outcome.adversarial_stego for r in records]
            target_adv_report = evaluate_classifier(target, [c.cover for c in test], adversarial)
            independent_adv_report = evaluate_classifier(independent, [c.cover for c in test], adversarial)
            logger.info(
                "adversarial P_E: target %.3f, independent %.3f",
                target_adv_report.p_e, independent_adv_report.p_e,
            )

        retrained_report: DetectionReport | None = None
        train_records: list[AttackRecord] = []
        if cfg.adv_train_count > 0 and train:
            self._progress("retrain")
            with stage("retrain"):
                subset = train[:cfg.adv_train_count]
                train_records = self._campaign(cfg, target, subset, run_dir / "images" / "adversarial_train")
                retrained = self._train(
                    cfg,
                    [c.cover for c in subset],
                    [r.outcome.adversarial_stego for r in train_records],
                    derive_seed(cfg.master_seed, RETRAIN_STREAM),
                    None,
                )
                files.append(_saved_model(retrained, run_dir / "models" / "retrained.stgm"))
                retrained_report = evaluate_classifier(retrained, [c.cover for c in test], adversarial)

        self._progress("report")
        with stage("report"):
            attack_report = AttackReport.from_records(records, cfg.delta_gamma)
            gates = {
                f"fooling success >= {FOOLING_GATE:.2f}": attack_report.success_rate >= FOOLING_GATE,
                f"target accuracy >= {ACCURACY_GATE:.2f}": target_report.accuracy >= ACCURACY_GATE,
            }
            detections = {
                "target/cmd": target_report,
                "target/plain": plain_report,
                "target/adversarial": target_adv_report,
                "independent/adversarial": independent_adv_report,
            }
            if retrained_report is not None:
                detections["retrained/adversarial"] = retrained_report
            files += self._write_reports(
                cfg, run_dir, records, train_records, attack_report, detections,
                clustering_rows, clustering, gates,
            )

        return ExperimentResult(
            run_dir=run_dir,
            config=cfg,
            target=target_report,
            target_plain=plain_report,
            target_adversarial=target_adv_report,
            independent_adversarial=independent_adv_report,
            attack=attack_report,
            retrained=retrained_report,
            clustering=clustering,
            gates=gates,
            files=tuple(files),
        )

    # ---------------------------
    # Stages
    # ---------------------------

    def _covers(self, cfg: ExperimentConfig, run_dir: Path) -> tuple[DatasetSplit, dict[str, GrayImage]]:
        if cfg.cover_manifest:
            manifest = read_manifest(cfg.cover_manifest)
        else:
            result = DatasetService().execute(
                GenerateDataset(
                    out_dir=run_dir / "images",
                    count=cfg.total_images,
                    size=cfg.image_size,
                    seed=cfg.generator_seed,
                    train=cfg.train_count,
                    validation=cfg.validation_count,
                )
            )
            manifest = read_manifest(result.manifest_path)
        split = manifest.to_split()
        covers = {image_id: manifest.load(image_id) for image_id in split.all_ids}
        logger.info(
            "%d covers: %d train / %d validation / %d test",
            len(covers), len(split.train), len(split.validation), len(split.test),
        )
        return split, covers

    def _cases(self, cfg: ExperimentConfig, split: DatasetSplit, covers: dict[str, GrayImage]) -> dict[str, ImageCase]:
        scheme = cost_scheme(cfg.cost_scheme)
        cases = {}
        for index, image_id in enumerate(sorted(split.all_ids)):
            cover = covers[image_id]
            embed_cfg = cfg.embed_config(derive_seed(cfg.master_seed, EMBED_STREAM, index))
            bits = embed_cfg.message_length(cover.width * cover.height)
            cases[image_id] = ImageCase(
                image_id=image_id,
                index=index,
                cover=cover,
                initial=scheme(cover),
                message=BitMessage.random(generator(cfg.master_seed, MESSAGE_STREAM, index), bits),
                embed_cfg=embed_cfg,
            )
        return cases

    def _embed(self, case: ImageCase, run_dir: Path) -> None:
        case.stego, case.adjusted, _order = embed_synchronized(
            case.cover, case.message, case.initial, case.embed_cfg
        )
        case.plain = embed_plain(case.cover, case.message, case.initial, case.embed_cfg)
        save_image(case.stego, run_dir / "images" / "stegos" / MODE_CMD / f"{case.image_id}.pgm")
        save_image(case.plain, run_dir / "images" / "stegos" / "plain" / f"{case.image_id}.pgm")

    def _train(
        self,
        cfg: ExperimentConfig,
        covers: Sequence[GrayImage],
        stegos: Sequence[GrayImage],
        seed: int,
        validation,
    ) -> ClassifierModel:
        return train_classifier(covers, stegos, cfg.epochs, seed, cfg.train_settings(), validation)

    def _campaign(
        self,
        cfg: ExperimentConfig,
        target: ClassifierModel,
        cases: Sequence[ImageCase],
        out_dir: Path,
    ) -> list[AttackRecord]:
        def attack(case: ImageCase) -> AttackRecord:
            adv = cfg.adv_config(derive_seed(cfg.master_seed, ATTACK_STREAM, case.index))
            started = time.perf_counter()
            outcome = ite_syn_attack(
                target, case.cover, case.message, case.stego, case.adjusted, adv, case.embed_cfg
            )
            seconds = time.perf_counter() - started if cfg.timing else 0.0
            verify_outcome(target, case, outcome, adv)
            save_image(outcome.adversarial_stego, out_dir / f"{case.image_id}.pgm")
            return AttackRecord(case.image_id, cfg.payload_rate, MODE_CMD, outcome, seconds)

        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                records = list(pool.map(attack, cases))
        else:
            records = [attack(case) for case in cases]
        wins = sum(r.outcome.succeeded for r in records)
        logger.info("campaign: %d/%d fooled", wins, len(records))
        return records

    def _write_reports(
        self,
        cfg: ExperimentConfig,
        run_dir: Path,
        records: list[AttackRecord],
        train_records: list[AttackRecord],
        attack_report: AttackReport,
        detections: dict[str, DetectionReport],
        clustering_rows: list[dict],
        clustering: SignTest,
        gates: dict[str, bool],
    ) -> list[Path]:
        dashboard = run_dir / "dashboard"
        images = dashboard / "images"
        curve = reports.gamma_cdf_frame(
            gamma_cdf([r.outcome for r in records], cfg.delta_gamma, cfg.gamma_max)
        )
        reembeds = reports.reembed_frame(attack_report)
        summary = reports.summary_frame(
            attack_report,
            {
                "target_accuracy": detections["target/cmd"].accuracy,
                "clustering_wins": clustering.wins,
                "clustering_losses": clustering.losses,
                "clustering_p_value": clustering.p_value,
                **{name: passed for name, passed in gates.items()},
            },
        )
        clustering_df = pd.DataFrame(clustering_rows, columns=["id", "cmd_agreement", "plain_agreement"])
        settings = pd.DataFrame(
            [(k, "" if v is None else v) for k, v in cfg.as_dict().items()], columns=["key", "value"]
        )

        written = [
            reports.write_attack_csv(records, dashboard / "attacks.csv"),
            reports.write_detection_csv(detections, dashboard / "detection.csv"),
            reports.write_frame(curve, dashboard / "gamma_cdf.csv"),
            reports.write_frame(reembeds, dashboard / "reembeds.csv"),
            reports.write_frame(summary, dashboard / "summary.csv"),
            reports.write_frame(clustering_df, dashboard / "clustering.csv"),
            reports.write_frame(settings, dashboard / "settings.csv"),
        ]
        if train_records:
            written.append(reports.write_attack_csv(train_records, dashboard / "attacks_train.csv"))
        written.append(reports.plot_gamma_cdf(curve, images / "gamma_cdf.png"))
        if not reembeds.empty:
            written.append(reports.plot_reembeds(reembeds, images / "reembeds.png"))
        written.append(
            reports.build_experiment_pdf(
                run_dir,
                {
                    "Summary": summary,
                    "Detection": reports.detection_frame(detections),
                    "Re-embeddings": reembeds,
                    "Attacks (first rows)": reports.attack_frame(records),
                },
                gates,
                cfg.as_dict(),
            )
        )
        return written


def _saved_model(model: ClassifierModel, path: Path) -> Path:
    save_model(model, path)
    return path


def verify_outcome(target: ClassifierModel, case: ImageCase, outcome: AttackOutcome, adv: AdvConfig) -> None:
    """Post-conditions every attack output must meet."""
    z = outcome.adversarial_stego
    if not verify_noise_identity(case.cover, case.stego, z):
        raise InvariantViolation(f"{case.image_id}: Z - C != (Z - S) + (S - C)")
    if outcome.succeeded and classify(target, z) != COVER:
        raise InvariantViolation(f"{case.image_id}: reported success but the target still flags Z")
    if not outcome.succeeded and z != case.stego:
        raise InvariantViolation(f"{case.image_id}: failed attack changed the stego")
    if outcome.reembeds > adv.max_reembeds:
        raise InvariantViolation(f"{case.image_id}: {outcome.reembeds} re-embeds exceed {adv.max_reembeds}")
    if case.embed_cfg.coder_mode == "stc":
        recovered = extract_synchronized(z, case.message.length, case.embed_cfg.stc_params)
        if recovered != case.message:
            raise InvariantViolation(f"{case.image_id}: message lost after the attack")
