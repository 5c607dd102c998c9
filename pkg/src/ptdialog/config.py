"""Pipeline configuration: YAML file -> nested dataclasses, validated up front."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import yaml

from ptdialog.labeling import SplitSpec, TrainingConfig
from ptdialog.responder import GenerationConfig
from ptdialog.transitions import Pairing, PTConfig


class ConfigError(ValueError):
    pass


@dataclass
class Paths:
    corpus: Optional[Path] = None
    emoji_table: Optional[Path] = None
    reviews: Optional[Path] = None
    contexts: Optional[Path] = None
    output_dir: Path = Path("runs/default")
    # artifacts below default to files inside output_dir
    sp_model: Optional[Path] = None
    forward_lm: Optional[Path] = None
    reverse_lm: Optional[Path] = None
    responses: Optional[Path] = None
    background: Optional[Path] = None
    lm_corpus: Optional[Path] = None


@dataclass(frozen=True)
class LMOptions:
    order: int = 3
    additive_alpha: float = 0.1


@dataclass(frozen=True)
class TransitionOptions:
    pairing: str = Pairing.CONSECUTIVE_UTTERANCES.value
    threshold: float = 0.1


@dataclass(frozen=True)
class MetricOptions:
    fluency_order: int = 2
    histogram_bins: int = 20


@dataclass
class PipelineConfig:
    paths: Paths = field(default_factory=Paths)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    pt: PTConfig = field(default_factory=PTConfig)
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    lm: LMOptions = field(default_factory=LMOptions)
    transitions: TransitionOptions = field(default_factory=TransitionOptions)
    metrics: MetricOptions = field(default_factory=MetricOptions)

    # -- derived artifact locations
    @property
    def out(self) -> Path:
        return self.paths.output_dir

    def artifact(self, name: str) -> Path:
        return self.out / name

    @property
    def sp_model_path(self) -> Path:
        return self.paths.sp_model or self.artifact("sp_model.json")

    @property
    def forward_lm_path(self) -> Path:
        return self.paths.forward_lm or self.artifact("forward_lm.json")

    @property
    def reverse_lm_path(self) -> Path:
        return self.paths.reverse_lm or self.artifact("reverse_lm.json")

    @property
    def responses_path(self) -> Path:
        return self.paths.responses or self.artifact("responses.jsonl")

    @property
    def lm_corpus_path(self) -> Path:
        return self.paths.lm_corpus or self.artifact("pt_corpus.jsonl")

    @property
    def background_path(self) -> Optional[Path]:
        return self.paths.background or self.paths.corpus

    def validate(self) -> None:
        t = self.transitions.threshold
        if not 0.0 <= t <= 1.0:
            raise ConfigError(f"transitions.threshold must lie in [0, 1], got {t}")
        try:
            Pairing(self.transitions.pairing)
        except ValueError:
            raise ConfigError(f"unknown transitions.pairing {self.transitions.pairing!r}") from None
        if self.lm.order < 1 or self.metrics.fluency_order < 1:
            raise ConfigError("n-gram orders must be >= 1")
        if self.lm.additive_alpha <= 0:
            raise ConfigError("lm.additive_alpha must be > 0")
        if self.metrics.histogram_bins < 1:
            raise ConfigError("metrics.histogram_bins must be >= 1")
        if self.training.learning_rate < 0 or self.training.epochs < 0 or self.training.batch_size < 1:
            raise ConfigError("training: learning_rate and epochs must be >= 0, batch_size >= 1")
        out = self.out
        probe = out
        while not probe.exists():
            probe = probe.parent
        if not probe.is_dir():
            raise ConfigError(f"output directory {out} cannot be created under {probe}")

    def require(self, *names: str) -> None:
        """Fail unless every named input path is configured and exists."""
        for name in names:
            derived = f"{name}_path"
            path = getattr(self, derived) if hasattr(type(self), derived) else getattr(self.paths, name)
            if path is None:
                raise ConfigError(f"paths.{name} is not set")
            if not Path(path).exists():
                raise ConfigError(f"{name} file not found: {path}")


_CLASSES = {
    "paths": Paths, "training": TrainingConfig, "split": SplitSpec, "pt": PTConfig,
    "generation": GenerationConfig, "lm": LMOptions, "transitions": TransitionOptions,
    "metrics": MetricOptions,
}


def _build(cls, section: str, data, base: Path):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section!r}: {', '.join(unknown)}")
    if cls is Paths:
        data = {k: (None if v is None else (base / Path(v)) if not Path(v).is_absolute() else Path(v))
                for k, v in data.items()}
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid {section!r} section: {e}") from None


def from_dict(raw: dict, base: Path = Path(".")) -> PipelineConfig:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    unknown = sorted(set(raw) - set(_CLASSES))
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(unknown)}")
    kwargs = {name: _build(cls, name, raw.get(name), base) for name, cls in _CLASSES.items()}
    return PipelineConfig(**kwargs)


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: invalid YAML: {e}") from None
    return from_dict(raw, path.parent)


def with_overrides(cfg: PipelineConfig, seed=None, out=None, threshold=None,
                   top_k=None, mode=None) -> PipelineConfig:
    """Apply command-line flag overrides on top of the file config."""
    replace = dataclasses.replace
    if seed is not None:
        cfg.training = replace(cfg.training, seed=seed)
        cfg.split = replace(cfg.split, seed=seed)
        cfg.generation = replace(cfg.generation, seed=seed)
    if out is not None:
        cfg.paths.output_dir = Path(out)
    if threshold is not None:
        cfg.transitions = replace(cfg.transitions, threshold=threshold)
    if top_k is not None:
        try:
            cfg.generation = replace(cfg.generation, top_k=top_k)
        except ValueError as e:
            raise ConfigError(str(e)) from None
    if mode is not None:
        cfg.pt = replace(cfg.pt, mode=mode)
    return cfg
