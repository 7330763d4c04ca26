from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from application.commands.attack_stego import AttackStego
from application.commands.compute_costs import ComputeCosts
from application.commands.embed_message import EmbedMessage
from application.commands.evaluate_classifier import EvaluateClassifier
from application.commands.extract_message import ExtractMessage
from application.commands.generate_dataset import GenerateDataset
from application.commands.run_experiment import RunExperiment
from application.commands.train_classifier import TrainClassifier
from application.services.attack_service import AttackService
from application.services.cost_service import CostService
from application.services.dataset_service import DatasetService
from application.services.embed_service import EmbedService
from application.services.evaluate_service import EvaluateService
from application.services.experiment_service import ExperimentService
from application.services.extract_service import ExtractService
from application.services.train_service import TrainService
from domain.adversary.costs import DEFAULT_DELTA_GAMMA, DEFAULT_GAMMA_MAX
from domain.coding.stc import DEFAULT_H
from domain.common.errors import DomainError
from domain.cost.schemes import COST_SCHEMES
from domain.syncdir.cmd import DEFAULT_BETA, NEIGHBORHOODS
from domain.syncdir.embedding import CODER_MODES
from infrastructure.experiment_config import load_config
from infrastructure.logging_setup import configure_logging

VERSION = "0.1.0"
TOOL = "ite-syn-lab"

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


# ---------------------------
# Utilities
# ---------------------------

def utc_run_id() -> str:
    return datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")


def utc_now_str() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M:%SZ")


def eprint(msg: str) -> None:
    print(msg, file=sys.stderr)


def is_tty() -> bool:
    try:
        return sys.stdout.isatty()
    except Exception:
        return False


def colorize(s: str, code: str, *, enable: bool) -> str:
    if not enable:
        return s
    return f"\033[{code}m{s}\033[0m"


def ok(s: str, *, color: bool) -> str:
    return colorize(s, "32", enable=color)  # green


def warn(s: str, *, color: bool) -> str:
    return colorize(s, "33", enable=color)  # yellow


def err(s: str, *, color: bool) -> str:
    return colorize(s, "31", enable=color)  # red


def bits_text(bits) -> str:
    return "".join(str(int(b)) for b in bits)


# ---------------------------
# CLI
# ---------------------------

def _add_embedding_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", choices=sorted(COST_SCHEMES), default="hill", help="Cost function for the cover.")
    p.add_argument("--coder", choices=CODER_MODES, default="sim",
                   help="sim: embedding simulator; stc: double-layer syndrome-trellis code (extractable).")
    p.add_argument("--stc-h", type=int, default=DEFAULT_H, help="STC constraint height.")
    p.add_argument("--beta", type=float, default=DEFAULT_BETA, help="Direction-synchronization divisor (> 1).")
    p.add_argument("--neighborhood", choices=sorted(NEIGHBORHOODS), default="cross",
                   help="Neighbours whose past changes steer the direction.")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog=TOOL,
        description="ITE-SYN lab: adaptive costs, direction-synchronized embedding, steganalyzer, adversarial re-embedding.",
    )
    p.add_argument("--version", action="store_true", help="Print version and exit.")
    p.add_argument("--json", action="store_true", help="Machine-readable output.")
    p.add_argument("--verbose", action="store_true", help="Debug logging on stderr.")
    p.add_argument("--no-color", action="store_true", help="Disable ANSI colors.")
    p.add_argument("--tee-log", type=str, default=None,
                   help="Write the full debug log to this file (experiment default: <run>/pipeline.log).")

    sub = p.add_subparsers(dest="cmd")

    gd = sub.add_parser("gen-dataset", help="Write seeded synthetic PGM covers and a split manifest.")
    gd.add_argument("--out", required=True, help="Output directory (covers/ + manifest.txt).")
    gd.add_argument("--count", type=int, default=2700, help="Number of covers.")
    gd.add_argument("--size", type=int, default=64, help="Cover width and height (even).")
    gd.add_argument("--train", type=int, default=2000, help="Covers in the train split.")
    gd.add_argument("--validation", type=int, default=200, help="Covers in the validation split; the rest is test.")
    gd.add_argument("--seed", type=int, default=0, help="Generator seed.")

    co = sub.add_parser("cost", help="Compute a wet-bounded cost map for one cover.")
    co.add_argument("--cover", required=True, help="Cover PGM.")
    co.add_argument("--out", required=True, help="Cost map file.")
    co.add_argument("--scheme", choices=sorted(COST_SCHEMES), default="hill", help="Cost function.")

    em = sub.add_parser("embed", help="Embed a message file into a cover.")
    em.add_argument("--cover", required=True, help="Cover PGM.")
    em.add_argument("--message", required=True, help="Message file; bits are read MSB-first.")
    em.add_argument("--out", required=True, help="Stego PGM.")
    size = em.add_mutually_exclusive_group(required=True)
    size.add_argument("--bits", type=int, help="Number of message bits to embed.")
    size.add_argument("--payload", type=float, help="Payload rate in bits per pixel.")
    em.add_argument("--seed", type=int, default=0, help="Embedding seed (start sub-lattice, simulator draws).")
    em.add_argument("--plain", action="store_true", help="Whole-image embedding without direction synchronization.")
    em.add_argument("--costs", default=None, help="Use this cost map instead of computing --scheme.")
    em.add_argument("--dump-costs", default=None, help="Write the final (adjusted) cost map here.")
    _add_embedding_flags(em)

    ex = sub.add_parser("extract", help="Recover message bits from an STC stego.")
    ex.add_argument("--stego", required=True, help="Stego PGM.")
    ex.add_argument("--bits", type=int, required=True, help="Message length in bits.")
    ex.add_argument("--stc-h", type=int, default=DEFAULT_H, help="STC constraint height used at embedding.")
    ex.add_argument("--plain", action="store_true", help="Stego was embedded with --plain.")
    ex.add_argument("--out", default=None, help="Write the message here instead of printing its bits.")

    tr = sub.add_parser("train-clf", help="Train the steganalyzer on paired cover/stego directories.")
    tr.add_argument("--covers", required=True, help="Directory of cover PGMs.")
    tr.add_argument("--stegos", required=True, help="Directory of stego PGMs with the same file names.")
    tr.add_argument("--out", required=True, help="Model file.")
    tr.add_argument("--epochs", type=int, default=30, help="Training epochs.")
    tr.add_argument("--seed", type=int, default=0, help="Initialization, shuffling and hold-out seed.")
    tr.add_argument("--batch-size", type=int, default=32, help="Mini-batch size.")
    tr.add_argument("--learning-rate", type=float, default=0.05, help="SGD learning rate.")
    tr.add_argument("--momentum", type=float, default=0.9, help="SGD momentum.")

    at = sub.add_parser("attack", help="ITE-SYN adversarial re-embedding of one stego.")
    at.add_argument("--model", required=True, help="Target model file.")
    at.add_argument("--cover", required=True, help="Cover PGM the stego was made from.")
    at.add_argument("--stego", required=True, help="Stego PGM.")
    at.add_argument("--message", required=True, help="Message file embedded in the stego.")
    at.add_argument("--bits", type=int, required=True, help="Message length in bits.")
    at.add_argument("--out", required=True, help="Adversarial stego PGM.")
    at.add_argument("--seed", type=int, default=0, help="Attack seed (start sub-lattice, candidate draws).")
    at.add_argument("--delta-gamma", type=float, default=DEFAULT_DELTA_GAMMA, help="Intensity step.")
    at.add_argument("--gamma-max", type=float, default=DEFAULT_GAMMA_MAX, help="Intensity bound (exclusive).")
    at.add_argument("--costs", default=None,
                    help="Adjusted cost map from embed --dump-costs; rebuilt from cover and stego when omitted.")
    _add_embedding_flags(at)

    ev = sub.add_parser("evaluate", help="P_FA / P_MD / P_E of a model on cover/stego directories.")
    ev.add_argument("--model", required=True, help="Model file.")
    ev.add_argument("--covers", required=True, help="Directory of cover PGMs.")
    ev.add_argument("--stegos", required=True, help="Directory of stego PGMs.")

    xp = sub.add_parser("experiment", help="Run the full desk experiment from a config file.")
    xp.add_argument("--config", required=True, help="key=value experiment config.")
    xp.add_argument("--out", default=None, help="Output root (default: out_dir from the config).")
    xp.add_argument("--run-id", default=None, help="Default: UTC timestamp.")
    xp.add_argument("--strict", action="store_true", help="Exit 1 when a harness gate fails.")

    return p


# ---------------------------
# Handlers
# ---------------------------

def _gen_dataset(args) -> dict:
    result = DatasetService().execute(
        GenerateDataset(
            out_dir=Path(args.out),
            count=args.count,
            size=args.size,
            seed=args.seed,
            train=args.train,
            validation=args.validation,
        )
    )
    split = result.split
    return {
        "manifest": str(result.manifest_path),
        "train": len(split.train),
        "validation": len(split.validation),
        "test": len(split.test),
        "summary": f"{len(split.all_ids)} covers, manifest {result.manifest_path}",
    }


def _cost(args) -> dict:
    costs = CostService().execute(ComputeCosts(Path(args.cover), Path(args.out), args.scheme))
    return {"out": args.out, "dry_pixels": costs.dry_pixels,
            "summary": f"{args.scheme} costs {costs.width}x{costs.height} -> {args.out}"}


def _embed(args) -> dict:
    result = EmbedService().execute(
        EmbedMessage(
            cover_path=Path(args.cover),
            message_path=Path(args.message),
            out_path=Path(args.out),
            seed=args.seed,
            bits=args.bits,
            payload_rate=args.payload,
            scheme=args.scheme,
            coder=args.coder,
            stc_h=args.stc_h,
            beta=args.beta,
            neighborhood=args.neighborhood,
            plain=args.plain,
            costs_path=Path(args.costs) if args.costs else None,
            dump_costs=Path(args.dump_costs) if args.dump_costs else None,
        )
    )
    order = " ".join(str(lattice) for lattice in result.order) if result.order else "plain"
    return {
        "out": args.out,
        "bits": result.bits,
        "changes": result.changes,
        "order": order,
        "summary": f"{result.bits} bits, {result.changes} changes, order {order} -> {args.out}",
    }


def _extract(args) -> dict:
    message = ExtractService().execute(
        ExtractMessage(
            stego_path=Path(args.stego),
            bits=args.bits,
            stc_h=args.stc_h,
            plain=args.plain,
            out_path=Path(args.out) if args.out else None,
        )
    )
    payload = {"bits": message.length, "out": args.out}
    if args.out:
        payload["summary"] = f"{message.length} bits -> {args.out}"
    else:
        payload["message"] = bits_text(message.bits)
        payload["summary"] = payload["message"]
    return payload


def _train(args) -> dict:
    model = TrainService().execute(
        TrainClassifier(
            cover_dir=Path(args.covers),
            stego_dir=Path(args.stegos),
            model_path=Path(args.out),
            epochs=args.epochs,
            seed=args.seed,
            batch_size=args.batch_size,
            learning_rate=args.learning_rate,
            momentum=args.momentum,
        )
    )
    return {
        "out": args.out,
        "validation_accuracy": model.validation_accuracy,
        "summary": f"validation accuracy {model.validation_accuracy:.3f} -> {args.out}",
    }


def _attack(args) -> dict:
    outcome = AttackService().execute(
        AttackStego(
            model_path=Path(args.model),
            cover_path=Path(args.cover),
            stego_path=Path(args.stego),
            message_path=Path(args.message),
            bits=args.bits,
            out_path=Path(args.out),
            seed=args.seed,
            delta_gamma=args.delta_gamma,
            gamma_max=args.gamma_max,
            costs_path=Path(args.costs) if args.costs else None,
            scheme=args.scheme,
            coder=args.coder,
            stc_h=args.stc_h,
            beta=args.beta,
            neighborhood=args.neighborhood,
        )
    )
    gamma = "-" if outcome.gamma_used is None else f"{outcome.gamma_used:.2f}"
    return {
        "out": args.out,
        "succeeded": outcome.succeeded,
        "gamma_used": outcome.gamma_used,
        "reembeds": outcome.reembeds,
        "sublattices_tried": outcome.sublattices_tried,
        "phi_before": outcome.phi_before,
        "phi_after": outcome.phi_after,
        "summary": (
            f"{'fooled' if outcome.succeeded else 'not fooled'} gamma={gamma} "
            f"reembeds={outcome.reembeds} phi={outcome.phi_before:.4f}->{outcome.phi_after:.4f} -> {args.out}"
        ),
    }


def _evaluate(args) -> dict:
    report = EvaluateService().execute(
        EvaluateClassifier(Path(args.model), Path(args.covers), Path(args.stegos))
    )
    return {
        **report.as_row(),
        "summary": f"P_FA={report.p_fa:.4f} P_MD={report.p_md:.4f} P_E={report.p_e:.4f}",
    }


HANDLERS = {
    "gen-dataset": _gen_dataset,
    "cost": _cost,
    "embed": _embed,
    "extract": _extract,
    "train-clf": _train,
    "attack": _attack,
    "evaluate": _evaluate,
}


def _experiment(args, *, color: bool) -> int:
    cfg = load_config(args.config)
    run_id = args.run_id or utc_run_id()
    run_dir = Path(args.out or cfg.out_dir).expanduser().resolve() / run_id
    tee_path = Path(args.tee_log).expanduser() if args.tee_log else run_dir / "pipeline.log"
    configure_logging(verbose=args.verbose, tee_path=tee_path)

    if not args.json:
        print(ok(f"🚀 {TOOL.upper()} EXPERIMENT", color=color))
        print(f"🕒 Time  : {utc_now_str()}")
        print(f"🆔 Run ID: {run_id}")
        print(f"📁 Out   : {run_dir}")
        print(f"🧾 Log   : {tee_path}")

    progress = None if args.json else (lambda name: print(f"▶ {name}"))
    result = ExperimentService(progress).execute(RunExperiment(Path(args.config), run_dir))
    exit_code = EXIT_DOMAIN if args.strict and not result.passed else EXIT_OK

    if args.json:
        payload = {
            "tool": TOOL,
            "version": VERSION,
            "cmd": "experiment",
            "time_utc": utc_now_str(),
            "run_id": run_id,
            "run_dir": str(run_dir),
            "success_rate": result.attack.success_rate,
            "target": result.target.as_row(),
            "target_plain": result.target_plain.as_row(),
            "target_adversarial": result.target_adversarial.as_row(),
            "independent_adversarial": result.independent_adversarial.as_row(),
            "retrained": result.retrained.as_row() if result.retrained else None,
            "clustering_p_value": result.clustering.p_value,
            "gates": result.gates,
            "strict": args.strict,
            "exit_code": exit_code,
            "files": [str(f) for f in result.files],
            "log": str(tee_path),
        }
        print(json.dumps(payload, indent=2))
        return exit_code

    print()
    print(f"🎯 Fooling success : {result.attack.success_percent:.1f}% "
          f"({result.attack.succeeded}/{result.attack.total})")
    print(f"🔎 Target P_E      : {result.target.p_e:.4f}")
    print(f"🥷 Adversarial P_E : target {result.target_adversarial.p_e:.4f}, "
          f"independent {result.independent_adversarial.p_e:.4f}")
    if result.retrained is not None:
        print(f"🛡️ Retrained P_E   : {result.retrained.p_e:.4f}")
    for name, passed in result.gates.items():
        line = f"{'✅' if passed else '⚠️'} gate {name}"
        print(ok(line, color=color) if passed else warn(line, color=color))

    if exit_code != EXIT_OK:
        print()
        print(err("❌ STRICT GATES FAILED", color=color))
        print(f"📁 {run_dir}")
        return exit_code

    print()
    print(ok("✅ EXPERIMENT COMPLETED", color=color))
    print(f"📁 {run_dir}")
    print(f"🧾 {tee_path}")
    return exit_code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    color = (not args.no_color) and is_tty()

    if args.version:
        print(f"{TOOL} {VERSION}")
        return EXIT_OK
    if args.cmd is None:
        parser.print_usage(sys.stderr)
        eprint(f"{TOOL}: error: a subcommand is required")
        return EXIT_USAGE

    try:
        if args.cmd == "experiment":
            return _experiment(args, color=color)

        configure_logging(
            verbose=args.verbose,
            tee_path=Path(args.tee_log).expanduser() if args.tee_log else None,
        )
        payload = HANDLERS[args.cmd](args)
    except (DomainError, OSError) as exc:
        eprint(err(f"❌ [{args.cmd}] {exc}", color=color))
        return EXIT_DOMAIN

    if args.json:
        print(json.dumps({"tool": TOOL, "version": VERSION, "cmd": args.cmd, **payload}, indent=2))
    else:
        print(ok(f"✅ {args.cmd}: {payload['summary']}", color=color))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
