"""System configuration: JSON file over defaults, with bundled-data fallbacks.

Paths in the config file resolve relative to the file's directory. The
special form ``builtin:<name>`` resolves to a data file shipped with the
package, so a minimal config can run entirely on bundled sample data.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .errors import ConfigError
from .generation import GenerationParams
from .preprocess import FeaturizerConfig


def builtin_data_path(name: str) -> str:
    path = resources.files("clintriage").joinpath("data", name)
    return str(path)


@dataclass(frozen=True)
class PathsConfig:
    dataset: str = "builtin:symptom2disease_sample.csv"
    corpus: str = "builtin:dialogues.jsonl"
    lexicon: str = "builtin:drug_lexicon.json"
    rules: str = "builtin:stewardship_rules.json"
    ddi: str = "builtin:ddi_database.csv"
    fallbacks: str = "builtin:fallback_treatments.json"
    synonyms: Optional[str] = "builtin:synonyms.tsv"
    model: str = "model.ckpt"
    embeddings: str = "embeddings.txt"
    calibration: str = "calibration.json"
    history: str = "history.csv"
    queue_journal: str = "review_queue.jsonl"
    reports_dir: str = "reports"
    judgments: Optional[str] = None
    references: Optional[str] = None


@dataclass(frozen=True)
class TrainingSection:
    profile: str = "desk"
    epochs: int = 10
    batch_size: int = 16
    dropout_rate: float = 0.1
    vit_hidden: int = 32
    trunk_hidden: int = 256
    train_fraction: float = 0.8
    smote_k: int = 5
    focal_gamma: float = 2.0
    weight_decay: float = 0.01
    warmup_fraction: float = 0.1
    layer_decay: float = 0.95
    clip_norm: float = 1.0
    lr_override: Optional[float] = None


@dataclass(frozen=True)
class InferenceSection:
    passes: int = 30
    threshold: Optional[float] = None  # falls back to the calibration file
    target_flag_rate: float = 0.18


@dataclass(frozen=True)
class RetrievalSection:
    k: int = 5
    min_score: float = 0.7
    embed_fields: str = "both"


@dataclass(frozen=True)
class GenerationSection:
    mode: str = "builtin"  # builtin | external
    endpoint: Optional[str] = None
    beam_size: int = 3
    temperature: float = 0.7
    max_tokens: int = 256
    timeout_s: float = 30.0
    evidence_budget: int = 2000

    def params(self) -> GenerationParams:
        return GenerationParams(beam_size=self.beam_size,
                                temperature=self.temperature,
                                max_tokens=self.max_tokens)


@dataclass(frozen=True)
class SafetySection:
    scgs_lambda: float = 0.5
    removal_level: str = "contraindicated"
    flag_level: str = "major"


@dataclass(frozen=True)
class ServiceSection:
    host: str = "127.0.0.1"
    port: int = 8008
    api_token: Optional[str] = None


@dataclass(frozen=True)
class SystemConfig:
    seed: int = 1234
    base_dir: str = "."
    paths: PathsConfig = field(default_factory=PathsConfig)
    featurizer: FeaturizerConfig = field(default_factory=FeaturizerConfig)
    training: TrainingSection = field(default_factory=TrainingSection)
    inference: InferenceSection = field(default_factory=InferenceSection)
    retrieval: RetrievalSection = field(default_factory=RetrievalSection)
    generation: GenerationSection = field(default_factory=GenerationSection)
    safety: SafetySection = field(default_factory=SafetySection)
    service: ServiceSection = field(default_factory=ServiceSection)

    def resolve(self, path: Optional[str]) -> Optional[str]:
        """Resolve a configured path against the base dir or the bundled data."""
        if path is None:
            return None
        if path.startswith("builtin:"):
            return builtin_data_path(path.removeprefix("builtin:"))
        if os.path.isabs(path):
            return path
        return os.path.normpath(os.path.join(self.base_dir, path))


def _build_section(cls, data: dict, context: str):
    fields = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(f"unknown {context} option(s): {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"invalid {context} section: {exc}") from exc


_SECTIONS = {
    "paths": PathsConfig,
    "featurizer": FeaturizerConfig,
    "training": TrainingSection,
    "inference": InferenceSection,
    "retrieval": RetrievalSection,
    "generation": GenerationSection,
    "safety": SafetySection,
    "service": ServiceSection,
}


def load_config(path: Optional[str]) -> SystemConfig:
    """Load a JSON config file; a missing path yields the full defaults."""
    if path is None:
        return SystemConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path!r} must be a JSON object")

    kwargs: dict[str, object] = {
        "base_dir": os.path.dirname(os.path.abspath(path)) or ".",
    }
    for key, value in raw.items():
        if key == "seed":
            kwargs["seed"] = int(value)
        elif key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"config section {key!r} must be an object")
            if key == "featurizer" and "ngram_orders" in value:
                value = {**value, "ngram_orders": tuple(value["ngram_orders"])}
            kwargs[key] = _build_section(_SECTIONS[key], value, key)
        else:
            raise ConfigError(f"unknown top-level config key {key!r}")
    return SystemConfig(**kwargs)
