"""Extraction loop: QA files in, interchange manifest plus JSONL shards out.

Each record's question and answer are rendered through the configured
templates, embedded, and the gold answer is teacher-force scored against
the image and rendered question. Output order follows input order; runs
are resumable (ids already present in an output shard are skipped), and
per-record failures are logged and counted rather than aborting the shard.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backends import ExtractionFailure, ModelBackend, build_backend
from .config import AdapterConfig, DatasetDescriptor

log = logging.getLogger("vlmextract")


@dataclass
class DatasetStats:
    dataset_id: str
    written: int = 0
    skipped_existing: int = 0
    failed: int = 0


def _read_qa(path: Path) -> list[dict]:
    rows = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            for key in ("id", "image", "question", "answer"):
                if key not in obj:
                    raise ValueError(f"{path}:{lineno}: missing field {key!r}")
            rows.append(obj)
    return rows


def _existing_ids(path: Path) -> set[str]:
    if not path.exists():
        return set()
    ids = set()
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                ids.add(json.loads(line)["id"])
    return ids


def _batched(items: list, size: int):
    for start in range(0, len(items), size):
        yield items[start : start + size]


def extract_dataset(
    config: AdapterConfig, descriptor: DatasetDescriptor, backend: ModelBackend
) -> DatasetStats:
    stats = DatasetStats(descriptor.id)
    rows = _read_qa(descriptor.qa_path)
    out_path = config.out_dir / f"{descriptor.id}.jsonl"
    done = _existing_ids(out_path)
    stats.skipped_existing = sum(1 for r in rows if r["id"] in done)
    todo = [r for r in rows if r["id"] not in done]
    if not todo:
        return stats

    with out_path.open("a", encoding="utf-8") as fh:
        for batch in _batched(todo, config.batch_size):
            questions = [config.render_question(r["question"]) for r in batch]
            answers = [config.render_answer(r["answer"]) for r in batch]
            q_embs = backend.embed_texts(questions)
            a_embs = backend.embed_texts(answers)
            i_embs = backend.embed_images([r["image"] for r in batch])
            for pos, row in enumerate(batch):
                try:
                    logprobs = backend.answer_logprobs(
                        row["image"], questions[pos], answers[pos]
                    )
                    record = _build_record(
                        row, q_embs[pos], a_embs[pos], i_embs[pos], logprobs
                    )
                except ExtractionFailure as exc:
                    stats.failed += 1
                    log.warning("%s: record %s skipped: %s", descriptor.id, row["id"], exc)
                    continue
                fh.write(json.dumps(record) + "\n")
                stats.written += 1
    return stats


def _build_record(row: dict, q_emb, a_emb, i_emb, logprobs: list[float]) -> dict:
    for name, vec in (("q_emb", q_emb), ("a_emb", a_emb), ("i_emb", i_emb)):
        arr = np.asarray(vec, dtype=np.float64)
        if not np.all(np.isfinite(arr)) or not np.any(arr):
            raise ExtractionFailure(f"{name} is non-finite or zero")
    if not logprobs or any(not np.isfinite(lp) or lp > 0 for lp in logprobs):
        raise ExtractionFailure("log-probabilities empty, non-finite, or positive")
    record = {
        "id": row["id"],
        "q_emb": [float(x) for x in q_emb],
        "a_emb": [float(x) for x in a_emb],
        "i_emb": [float(x) for x in i_emb],
        "ans_logprobs": [float(lp) for lp in logprobs],
        "question_text": row["question"],
        "answer_text": row["answer"],
    }
    if row.get("producer") is not None:
        record["producer"] = row["producer"]
    return record


def extract(config: AdapterConfig, backend: ModelBackend | None = None) -> list[DatasetStats]:
    """Run extraction for every configured dataset and write the manifest."""
    config.validate()
    backend = backend or build_backend(config.model, config.device, config.embedding_dim)
    config.out_dir.mkdir(parents=True, exist_ok=True)

    all_stats = []
    dim = None
    for descriptor in config.datasets:
        stats = extract_dataset(config, descriptor, backend)
        all_stats.append(stats)
        log.info(
            "%s: wrote %d, skipped %d existing, failed %d",
            stats.dataset_id, stats.written, stats.skipped_existing, stats.failed,
        )
        shard = config.out_dir / f"{descriptor.id}.jsonl"
        if dim is None and shard.exists():
            with shard.open("r", encoding="utf-8") as fh:
                first = fh.readline()
                if first.strip():
                    dim = len(json.loads(first)["q_emb"])

    manifest = {
        "embedding_dim": dim if dim is not None else config.embedding_dim,
        "datasets": [
            {
                "id": d.id,
                "role": d.role,
                "samples_path": f"{d.id}.jsonl",
                "split": d.split,
            }
            for d in config.datasets
        ],
    }
    (config.out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return all_stats
