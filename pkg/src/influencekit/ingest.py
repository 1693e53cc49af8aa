"""Loading and validation of dataset manifests and per-sample record files.

The interchange format is a manifest JSON file plus one JSON Lines file per
dataset.  Every record carries three field embeddings (question, answer,
image) and the natural-log probabilities of the answer tokens under the
frozen base model.  All numbers are read into 64-bit floats so downstream
accumulation is reproducible regardless of producer precision.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateDatasetId,
    EmptyDataset,
    EmptyLogprobs,
    MalformedManifest,
    MalformedRecord,
    NonPositiveDim,
    PositiveLogprob,
    UnknownDatasetId,
    ZeroNormEmbedding,
)

FORMAT_VERSION = "1"

_ROLES = ("source", "target", "both")
_SPLITS = ("train", "test")


class Role(str, enum.Enum):
    SOURCE = "source"
    TARGET = "target"
    BOTH = "both"

    @property
    def is_source(self) -> bool:
        return self in (Role.SOURCE, Role.BOTH)

    @property
    def is_target(self) -> bool:
        return self in (Role.TARGET, Role.BOTH)


class FieldKind(str, enum.Enum):
    QUESTION = "question"
    ANSWER = "answer"
    IMAGE = "image"


@dataclass(frozen=True)
class DatasetEntry:
    id: str
    role: Role
    samples_path: Path  # resolved against the manifest's directory
    split: str


@dataclass(frozen=True)
class Manifest:
    embedding_dim: int
    datasets: tuple[DatasetEntry, ...]

    def entry(self, dataset_id: str) -> DatasetEntry:
        for e in self.datasets:
            if e.id == dataset_id:
                return e
        raise UnknownDatasetId(f"dataset {dataset_id!r} not in manifest")


@dataclass(frozen=True)
class SampleRecord:
    """One QA example: field embeddings plus answer-token log-probabilities."""

    id: str
    q_emb: np.ndarray
    a_emb: np.ndarray
    i_emb: np.ndarray
    ans_logprobs: np.ndarray
    question_text: str | None = None
    answer_text: str | None = None
    producer: str | None = None

    def embedding(self, field_kind: FieldKind) -> np.ndarray:
        if field_kind is FieldKind.QUESTION:
            return self.q_emb
        if field_kind is FieldKind.ANSWER:
            return self.a_emb
        return self.i_emb


@dataclass(eq=False)
class SampleSet:
    """An ordered, validated collection of records from one dataset.

    Order is file order; downstream tie-breaks and sampling reference it.
    Instances are treated as immutable after construction; the stacked
    matrices are cached on first use.
    """

    dataset_id: str
    embedding_dim: int
    records: tuple[SampleRecord, ...]
    _matrices: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.records)

    def field_matrix(self, field_kind: FieldKind) -> np.ndarray:
        """Raw (n, dim) matrix of one field's embeddings, in record order."""
        key = ("raw", field_kind)
        if key not in self._matrices:
            m = np.stack([r.embedding(field_kind) for r in self.records])
            m.setflags(write=False)
            self._matrices[key] = m
        return self._matrices[key]

    def normalized_matrix(self, field_kind: FieldKind) -> np.ndarray:
        """(n, dim) matrix of unit-norm field embeddings, in record order."""
        key = ("unit", field_kind)
        if key not in self._matrices:
            raw = self.field_matrix(field_kind)
            norms = np.linalg.norm(raw, axis=1, keepdims=True)
            m = raw / norms
            m.setflags(write=False)
            self._matrices[key] = m
        return self._matrices[key]

    def record_mean_logprobs(self) -> np.ndarray:
        """(n,) per-record arithmetic means of ans_logprobs, in record order."""
        key = ("mlp",)
        if key not in self._matrices:
            m = np.array([float(np.mean(r.ans_logprobs)) for r in self.records])
            m.setflags(write=False)
            self._matrices[key] = m
        return self._matrices[key]


@dataclass
class DatasetReport:
    dataset_id: str
    record_count: int
    min_answer_tokens: int | None
    max_answer_tokens: int | None
    errors: list[dict] = field(default_factory=list)


@dataclass
class ValidationReport:
    datasets: list[DatasetReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(not d.errors for d in self.datasets)

    @property
    def error_count(self) -> int:
        return sum(len(d.errors) for d in self.datasets)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "datasets": [
                {
                    "dataset_id": d.dataset_id,
                    "record_count": d.record_count,
                    "min_answer_tokens": d.min_answer_tokens,
                    "max_answer_tokens": d.max_answer_tokens,
                    "errors": d.errors,
                }
                for d in self.datasets
            ],
        }


def load_manifest(path: str | Path) -> Manifest:
    """Parse and validate a manifest file.

    Sample paths are resolved relative to the manifest's directory.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedManifest(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedManifest(f"{path}: top-level value must be an object")

    dim = raw.get("embedding_dim")
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise MalformedManifest(f"{path}: embedding_dim must be an integer")
    if dim < 1:
        raise NonPositiveDim(f"{path}: embedding_dim must be >= 1, got {dim}")

    entries_raw = raw.get("datasets")
    if not isinstance(entries_raw, list):
        raise MalformedManifest(f"{path}: datasets must be a list")

    base = path.parent
    entries: list[DatasetEntry] = []
    seen: set[str] = set()
    for i, item in enumerate(entries_raw):
        where = f"{path}: datasets[{i}]"
        if not isinstance(item, dict):
            raise MalformedManifest(f"{where}: entry must be an object")
        ds_id = item.get("id")
        if not isinstance(ds_id, str) or not ds_id:
            raise MalformedManifest(f"{where}: id must be a non-empty string")
        if ds_id in seen:
            raise DuplicateDatasetId(f"{path}: duplicate dataset id {ds_id!r}")
        seen.add(ds_id)
        role = item.get("role")
        if role not in _ROLES:
            raise MalformedManifest(f"{where}: role must be one of {_ROLES}, got {role!r}")
        split = item.get("split")
        if split not in _SPLITS:
            raise MalformedManifest(f"{where}: split must be one of {_SPLITS}, got {split!r}")
        samples_path = item.get("samples_path")
        if not isinstance(samples_path, str) or not samples_path:
            raise MalformedManifest(f"{where}: samples_path must be a non-empty string")
        entries.append(
            DatasetEntry(id=ds_id, role=Role(role), samples_path=base / samples_path, split=split)
        )
    return Manifest(embedding_dim=dim, datasets=tuple(entries))


def _parse_vector(value, name: str, dim: int, where: str) -> np.ndarray:
    if not isinstance(value, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
    ):
        raise MalformedRecord(f"{where}: {name} must be a list of numbers")
    vec = np.asarray(value, dtype=np.float64)
    if vec.shape != (dim,):
        raise DimensionMismatch(f"{where}: {name} has {vec.size} entries, expected {dim}")
    if not np.all(np.isfinite(vec)):
        raise MalformedRecord(f"{where}: {name} contains a non-finite value")
    if not np.any(vec):
        raise ZeroNormEmbedding(f"{where}: {name} has zero norm")
    return vec


def parse_record(obj: dict, dim: int, where: str) -> SampleRecord:
    """Validate one decoded JSON object against the interchange schema."""
    if not isinstance(obj, dict):
        raise MalformedRecord(f"{where}: record must be an object")
    rec_id = obj.get("id")
    if not isinstance(rec_id, str) or not rec_id:
        raise MalformedRecord(f"{where}: id must be a non-empty string")

    q = _parse_vector(obj.get("q_emb"), "q_emb", dim, where)
    a = _parse_vector(obj.get("a_emb"), "a_emb", dim, where)
    i = _parse_vector(obj.get("i_emb"), "i_emb", dim, where)

    lp_raw = obj.get("ans_logprobs")
    if not isinstance(lp_raw, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in lp_raw
    ):
        raise MalformedRecord(f"{where}: ans_logprobs must be a list of numbers")
    if len(lp_raw) == 0:
        raise EmptyLogprobs(f"{where}: ans_logprobs is empty")
    lp = np.asarray(lp_raw, dtype=np.float64)
    if not np.all(np.isfinite(lp)):
        raise MalformedRecord(f"{where}: ans_logprobs contains a non-finite value")
    if np.any(lp > 0):
        bad = float(lp[lp > 0][0])
        raise PositiveLogprob(f"{where}: log-probability {bad} is > 0")

    texts = {}
    for key in ("question_text", "answer_text", "producer"):
        val = obj.get(key)
        if val is not None and not isinstance(val, str):
            raise MalformedRecord(f"{where}: {key} must be a string when present")
        texts[key] = val

    for arr in (q, a, i, lp):
        arr.setflags(write=False)
    return SampleRecord(
        id=rec_id, q_emb=q, a_emb=a, i_emb=i, ans_logprobs=lp,
        question_text=texts["question_text"], answer_text=texts["answer_text"],
        producer=texts["producer"],
    )


def load_sample_file(path: str | Path, dim: int, dataset_id: str) -> SampleSet:
    """Load a JSON Lines sample file, validating every record against dim.

    Record order equals file order.  Any invalid line raises with the
    offending file and 1-based line number in the message.
    """
    path = Path(path)
    records: list[SampleRecord] = []
    ids: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(f"{where}: invalid JSON: {exc.msg}") from exc
            rec = parse_record(obj, dim, where)
            if rec.id in ids:
                raise MalformedRecord(f"{where}: duplicate record id {rec.id!r}")
            ids.add(rec.id)
            records.append(rec)
    if not records:
        raise EmptyDataset(f"{path}: no records")
    return SampleSet(dataset_id=dataset_id, embedding_dim=dim, records=tuple(records))


def load_samples(entry: DatasetEntry, dim: int) -> SampleSet:
    return load_sample_file(entry.samples_path, dim, entry.id)


# validate_manifest collects exactly the ingestion errors, nothing broader.
_LOAD_ERRORS = (MalformedRecord, DimensionMismatch, EmptyDataset)


def validate_manifest(manifest: Manifest) -> ValidationReport:
    """Try to load every dataset, collecting failures instead of raising."""
    report = ValidationReport()
    for entry in manifest.datasets:
        ds = DatasetReport(entry.id, 0, None, None)
        try:
            sset = load_samples(entry, manifest.embedding_dim)
        except FileNotFoundError as exc:
            ds.errors.append({"kind": "FileNotFound", "message": str(exc)})
        except OSError as exc:
            ds.errors.append({"kind": "Unreadable", "message": str(exc)})
        except _LOAD_ERRORS as exc:
            ds.errors.append({"kind": type(exc).__name__, "message": str(exc)})
        else:
            lengths = [len(r.ans_logprobs) for r in sset.records]
            ds.record_count = len(sset)
            ds.min_answer_tokens = min(lengths)
            ds.max_answer_tokens = max(lengths)
        report.datasets.append(ds)
    return report


def record_to_json_obj(rec: SampleRecord) -> dict:
    """Serialize a record back to the interchange field layout."""
    obj = {
        "id": rec.id,
        "q_emb": [float(x) for x in rec.q_emb],
        "a_emb": [float(x) for x in rec.a_emb],
        "i_emb": [float(x) for x in rec.i_emb],
        "ans_logprobs": [float(x) for x in rec.ans_logprobs],
    }
    if rec.question_text is not None:
        obj["question_text"] = rec.question_text
    if rec.answer_text is not None:
        obj["answer_text"] = rec.answer_text
    if rec.producer is not None:
        obj["producer"] = rec.producer
    return obj
