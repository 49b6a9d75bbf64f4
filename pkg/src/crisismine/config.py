"""Declarative pipeline configuration (strict YAML parsing)."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml


class ConfigError(ValueError):
    pass


@dataclass
class PathsConfig:
    workdir: str = "out"
    reference_corpus: str = ""
    general_corpus: str = ""
    translations_corpus: str = ""
    vectors_file: str = ""
    cache_dir: str = ""
    labels_file: str = ""


@dataclass
class CleaningSection:
    min_words: int = 8
    near_dup_threshold: float = 0.8
    expected_langs: list = field(default_factory=lambda: ["it", "en"])
    seed: int = 0
    num_permutations: int = 128
    shingle_size: int = 3
    lsh_bands: int = 32


@dataclass
class RetrievalSection:
    k: int = 5
    top_k: int = 50000
    seed: int = 0
    side: str = "source"
    provider: str = "file"  # file | http
    endpoint: str = ""
    dim: int = 384


@dataclass
class ThresholdSection:
    num_partitions: int = 6
    per_partition: int = 50
    sample_seed: int = 0
    retain_top: int | None = None


@dataclass
class DatasetSection:
    segments_per_paragraph: int = 10
    paragraph_seed: int = 0
    min_fre_gain: float = 5.0
    min_fre: float = 50.0
    min_adequacy: float = 0.5
    llm_endpoint: str = ""
    offline_table: str = ""


@dataclass
class EvaluationSection:
    da_threshold: float = 75.0
    bleu_max_n: int = 4
    chrf_char_n: int = 6


@dataclass
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    cleaning: CleaningSection = field(default_factory=CleaningSection)
    retrieval: RetrievalSection = field(default_factory=RetrievalSection)
    threshold: ThresholdSection = field(default_factory=ThresholdSection)
    dataset: DatasetSection = field(default_factory=DatasetSection)
    evaluation: EvaluationSection = field(default_factory=EvaluationSection)

    @property
    def workdir(self) -> Path:
        return Path(self.paths.workdir)


def _build(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        f = known[name]
        if hasattr(f.type, "__dataclass_fields__") or f.name in (
                "paths", "cleaning", "retrieval", "threshold", "dataset", "evaluation"):
            sub_cls = f.default_factory().__class__ if f.default_factory else f.type
            kwargs[name] = _build(sub_cls, value, f"{path}.{name}")
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}")


def load_config(path) -> PipelineConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})")
    return _build(PipelineConfig, raw, "config")
