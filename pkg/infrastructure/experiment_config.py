"""
Experiment configuration: plain-text key=value lines, '#' comments.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from domain.common.errors import ConfigError, DomainError
from domain.adversary.attack import AdvConfig
from domain.adversary.training import TrainSettings
from domain.cost.schemes import COST_SCHEMES
from domain.syncdir.embedding import CODER_MODES, EmbedConfig
from domain.syncdir.cmd import NEIGHBORHOODS

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int = 2024
    out_dir: str = "./out"
    cover_manifest: str | None = None
    generator_seed: int = 1
    image_size: int = 64
    train_count: int = 2000
    validation_count: int = 200
    test_count: int = 500
    payload_rate: float = 0.4
    cost_scheme: str = "hill"
    coder: str = "sim"
    stc_h: int = 10
    beta: float = 10.0
    neighborhood: str = "cross"
    delta_gamma: float = 0.1
    gamma_max: float = 10.0
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 0.05
    momentum: float = 0.9
    adv_train_count: int = 500
    workers: int = 1
    timing: bool = True

    def __post_init__(self):
        for name in ("image_size", "train_count", "validation_count", "test_count", "batch_size", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.epochs < 0 or self.adv_train_count < 0:
            raise ConfigError("epochs and adv_train_count must be non-negative")
        if self.cost_scheme not in COST_SCHEMES:
            raise ConfigError(f"cost_scheme must be one of {sorted(COST_SCHEMES)}")
        if self.coder not in CODER_MODES:
            raise ConfigError(f"coder must be one of {CODER_MODES}")
        if self.neighborhood not in NEIGHBORHOODS:
            raise ConfigError(f"neighborhood must be one of {sorted(NEIGHBORHOODS)}")
        try:
            self.embed_config(self.master_seed)
            self.adv_config(self.master_seed)
            self.train_settings()
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def total_images(self) -> int:
        return self.train_count + self.validation_count + self.test_count

    def embed_config(self, seed: int) -> EmbedConfig:
        return EmbedConfig(
            payload_rate=self.payload_rate,
            seed=seed,
            beta=self.beta,
            coder_mode=self.coder,
            stc_h=self.stc_h,
            neighborhood=self.neighborhood,
        )

    def adv_config(self, seed: int) -> AdvConfig:
        return AdvConfig(delta_gamma=self.delta_gamma, gamma_max=self.gamma_max, seed=seed)

    def train_settings(self) -> TrainSettings:
        return TrainSettings(
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            momentum=self.momentum,
        )

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _convert(raw: str, kind) -> object:
    if kind is bool:
        lowered = raw.lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return raw


_KINDS = {
    f.name: {"int": int, "float": float, "bool": bool}.get(str(f.type), str)
    for f in fields(ExperimentConfig)
}


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    values: dict[str, object] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{number}: expected key=value, got {raw!r}")
        if key not in _KINDS:
            raise ConfigError(f"{source}:{number}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{number}: duplicate key {key!r}")
        try:
            values[key] = _convert(value, _KINDS[key])
        except ValueError as exc:
            raise ConfigError(f"{source}:{number}: {key}: {exc}") from None
    return ExperimentConfig(**values)


def load_config(path: Path | str) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), str(path))
