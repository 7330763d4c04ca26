import json
import time
from pathlib import Path

import pandas as pd
import pytest

from application.commands.run_experiment import RunExperiment
from application.services.experiment_service import ExperimentService
from cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, VERSION, main
from infrastructure.model_repository import save_model
from tests.conftest import constant_model

MESSAGE = bytes(range(7, 19))  # 96 bits


@pytest.fixture
def dataset(tmp_path) -> Path:
    out = tmp_path / "data"
    code = main(["gen-dataset", "--out", str(out), "--count", "4", "--size", "16",
                 "--train", "2", "--validation", "1", "--seed", "3"])
    assert code == EXIT_OK
    return out


@pytest.fixture
def message_file(tmp_path) -> Path:
    path = tmp_path / "secret.bin"
    path.write_bytes(MESSAGE)
    return path


def _embed(dataset, message_file, out, *extra):
    return main(["embed", "--cover", str(dataset / "covers" / "c00000.pgm"), "--message", str(message_file),
                 "--out", str(out), "--bits", "96", "--seed", "5", *extra])


def test_version(capsys):
    assert main(["--version"]) == EXIT_OK
    assert VERSION in capsys.readouterr().out


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert "subcommand is required" in capsys.readouterr().err
    assert main(["embed", "--cover", "x.pgm"]) == EXIT_USAGE
    assert main(["attack", "--no-such-flag"]) == EXIT_USAGE


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == EXIT_OK
    assert "experiment" in capsys.readouterr().out


def test_domain_errors_exit_one(tmp_path, message_file, capsys):
    assert main(["embed", "--cover", str(tmp_path / "missing.pgm"), "--message", str(message_file),
                 "--out", str(tmp_path / "s.pgm"), "--bits", "8"]) == EXIT_DOMAIN
    assert "❌ [embed]" in capsys.readouterr().err
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P2\n2 2\n255\n0 0 0 0\n")
    assert main(["cost", "--cover", str(bad), "--out", str(tmp_path / "c.cost")]) == EXIT_DOMAIN


def test_message_longer_than_file_is_rejected(dataset, message_file, tmp_path):
    code = main(["embed", "--cover", str(dataset / "covers" / "c00000.pgm"), "--message", str(message_file),
                 "--out", str(tmp_path / "s.pgm"), "--bits", "120"])
    assert code == EXIT_DOMAIN


@pytest.mark.parametrize("plain", [False, True])
def test_stc_embed_then_extract_recovers_the_file(dataset, message_file, tmp_path, plain):
    stego = tmp_path / "stego.pgm"
    flags = ["--plain"] if plain else []
    assert _embed(dataset, message_file, stego, "--coder", "stc", *flags) == EXIT_OK
    recovered = tmp_path / "recovered.bin"
    assert main(["extract", "--stego", str(stego), "--bits", "96", "--out", str(recovered), *flags]) == EXIT_OK
    assert recovered.read_bytes() == MESSAGE


def test_extract_prints_bits(dataset, message_file, tmp_path, capsys):
    stego = tmp_path / "stego.pgm"
    assert _embed(dataset, message_file, stego, "--coder", "stc") == EXIT_OK
    capsys.readouterr()
    assert main(["--json", "extract", "--stego", str(stego), "--bits", "96"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["message"]) == 96
    assert payload["message"].startswith("0000011100001000")


def test_embedding_is_deterministic(dataset, message_file, tmp_path):
    first, second = tmp_path / "a.pgm", tmp_path / "b.pgm"
    assert _embed(dataset, message_file, first) == EXIT_OK
    assert _embed(dataset, message_file, second) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_cost_and_dump_costs(dataset, message_file, tmp_path):
    cover = dataset / "covers" / "c00001.pgm"
    assert main(["cost", "--cover", str(cover), "--out", str(tmp_path / "c.cost"), "--scheme", "suniward"]) == EXIT_OK
    dumped = tmp_path / "final.cost"
    assert _embed(dataset, message_file, tmp_path / "s.pgm", "--dump-costs", str(dumped)) == EXIT_OK
    assert dumped.stat().st_size > 0


def test_attack_on_passing_stego_returns_it_unchanged(dataset, message_file, tmp_path, capsys):
    stego = tmp_path / "stego.pgm"
    assert _embed(dataset, message_file, stego) == EXIT_OK
    model = tmp_path / "cover.stgm"
    save_model(constant_model(3.0), model)
    out = tmp_path / "adv.pgm"
    capsys.readouterr()
    code = main(["--json", "attack", "--model", str(model), "--cover", str(dataset / "covers" / "c00000.pgm"),
                 "--stego", str(stego), "--message", str(message_file), "--bits", "96", "--out", str(out)])
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["succeeded"] is True and payload["reembeds"] == 0
    assert out.read_bytes() == stego.read_bytes()


def test_train_and_evaluate(dataset, message_file, tmp_path, capsys):
    stegos = tmp_path / "stegos"
    for cover in sorted((dataset / "covers").glob("*.pgm")):
        code = main(["embed", "--cover", str(cover), "--message", str(message_file),
                     "--out", str(stegos / cover.name), "--payload", "0.375"])
        assert code == EXIT_OK
    model = tmp_path / "m.stgm"
    assert main(["train-clf", "--covers", str(dataset / "covers"), "--stegos", str(stegos),
                 "--out", str(model), "--epochs", "1", "--batch-size", "2"]) == EXIT_OK
    capsys.readouterr()
    assert main(["--json", "evaluate", "--model", str(model), "--covers", str(dataset / "covers"),
                 "--stegos", str(stegos)]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["p_e"] == pytest.approx((payload["p_fa"] + payload["p_md"]) / 2)
    assert payload["n_cover"] == payload["n_stego"] == 4


TINY = """
master_seed = 11
image_size = 16
train_count = 6
validation_count = 2
test_count = 3
coder = sim
delta_gamma = 0.5
gamma_max = 1.5
epochs = 1
batch_size = 4
adv_train_count = 2
timing = off
"""


def test_experiment_writes_the_run_directory(tmp_path, capsys):
    config = tmp_path / "tiny.cfg"
    config.write_text(TINY, encoding="utf-8")
    code = main(["--no-color", "experiment", "--config", str(config), "--out", str(tmp_path / "runs"),
                 "--run-id", "t1"])
    assert code == EXIT_OK
    run = tmp_path / "runs" / "t1"
    out = capsys.readouterr().out
    assert "▶ attack" in out and "Fooling success" in out
    for name in ("attacks.csv", "detection.csv", "gamma_cdf.csv", "summary.csv", "clustering.csv",
                 "settings.csv", "attacks_train.csv"):
        assert (run / "dashboard" / name).exists(), name
    assert (run / "reports" / "EXPERIMENT_REPORT.pdf").stat().st_size > 0
    for model in ("target", "independent", "retrained"):
        assert (run / "models" / f"{model}.stgm").exists(), model
    detection = pd.read_csv(run / "dashboard" / "detection.csv")
    assert list(detection["classifier"]) == [
        "target/cmd", "target/plain", "target/adversarial", "independent/adversarial", "retrained/adversarial",
    ]
    assert (detection["n_stego"] == 3).all()
    assert "Adversarial P_E" in out
    assert (run / "pipeline.log").exists()
    attacks = pd.read_csv(run / "dashboard" / "attacks.csv")
    assert list(attacks["id"]) == sorted(attacks["id"]) and len(attacks) == 3
    assert (attacks["seconds"] == 0).all()
    curve = pd.read_csv(run / "dashboard" / "gamma_cdf.csv")
    assert curve["cumulative_success_pct"].is_monotonic_increasing


def test_experiment_config_error_exits_one(tmp_path, capsys):
    config = tmp_path / "bad.cfg"
    config.write_text("coder = turbo\n", encoding="utf-8")
    assert main(["experiment", "--config", str(config), "--out", str(tmp_path)]) == EXIT_DOMAIN
    assert "coder" in capsys.readouterr().err


CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_smoke_runs_are_byte_identical(tmp_path, capsys):
    for run_id in ("a", "b"):
        code = main(["--json", "experiment", "--config", str(CONFIGS / "smoke.cfg"),
                     "--out", str(tmp_path), "--run-id", run_id])
        assert code == EXIT_OK
    capsys.readouterr()
    first, second = tmp_path / "a" / "dashboard", tmp_path / "b" / "dashboard"
    names = sorted(p.name for p in first.glob("*.csv"))
    assert "attacks.csv" in names and "detection.csv" in names
    assert names == sorted(p.name for p in second.glob("*.csv"))
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


@pytest.mark.slow
def test_desk_campaign_meets_the_gates(tmp_path):
    started = time.monotonic()
    result = ExperimentService().execute(RunExperiment(CONFIGS / "desk.cfg", tmp_path / "desk"))
    assert time.monotonic() - started < 2 * 3600
    assert result.target.accuracy >= 0.65
    assert result.attack.success_rate >= 0.80
    assert result.passed
