"""Adapter configuration: model, templates, pooling, and dataset descriptors."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetDescriptor:
    """One dataset to extract: a QA JSONL file plus manifest metadata.

    The QA file holds one object per line with fields id, image, question,
    answer; `image` is whatever reference the backend understands (a path
    for real models, any string for the mock).
    """

    id: str
    qa_path: Path
    role: str = "both"
    split: str = "train"


@dataclass(frozen=True)
class AdapterConfig:
    model: str
    out_dir: Path
    datasets: tuple[DatasetDescriptor, ...]
    device: str = "cpu"
    batch_size: int = 16
    question_template: str = "Question: {question}"
    answer_template: str = "{answer}"
    pooling: str = "mean"
    embedding_dim: int = 16  # used by the mock backend; real encoders define their own

    def validate(self) -> None:
        if self.question_template.count("{question}") != 1:
            raise ConfigError("question_template needs exactly one {question} placeholder")
        if self.answer_template.count("{answer}") != 1:
            raise ConfigError("answer_template needs exactly one {answer} placeholder")
        if self.pooling != "mean":
            raise ConfigError(f"unsupported pooling {self.pooling!r} (only mean)")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not self.datasets:
            raise ConfigError("no datasets configured")
        ids = [d.id for d in self.datasets]
        if len(set(ids)) != len(ids):
            raise ConfigError("dataset ids must be unique")

    def render_question(self, question: str) -> str:
        return self.question_template.format(question=question)

    def render_answer(self, answer: str) -> str:
        return self.answer_template.format(answer=answer)


def load_config(path: str | Path) -> AdapterConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    base = path.parent
    try:
        datasets = tuple(
            DatasetDescriptor(
                id=d["id"],
                qa_path=base / d["qa_path"],
                role=d.get("role", "both"),
                split=d.get("split", "train"),
            )
            for d in obj["datasets"]
        )
        config = AdapterConfig(
            model=obj["model"],
            out_dir=base / obj["out_dir"],
            datasets=datasets,
            device=obj.get("device", "cpu"),
            batch_size=int(obj.get("batch_size", 16)),
            question_template=obj.get("question_template", "Question: {question}"),
            answer_template=obj.get("answer_template", "{answer}"),
            pooling=obj.get("pooling", "mean"),
            embedding_dim=int(obj.get("embedding_dim", 16)),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: missing or invalid field: {exc}") from exc
    config.validate()
    return config
