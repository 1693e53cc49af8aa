import json
from pathlib import Path

import numpy as np
import pytest

from influencekit.ingest import SampleRecord, SampleSet


def make_record(
    rec_id="r0",
    q=(1.0, 0.0),
    a=(1.0, 0.0),
    i=(1.0, 0.0),
    logprobs=(-0.5,),
    **extra,
):
    def arr(x):
        out = np.asarray(x, dtype=np.float64)
        out.setflags(write=False)
        return out

    return SampleRecord(
        id=rec_id, q_emb=arr(q), a_emb=arr(a), i_emb=arr(i),
        ans_logprobs=arr(logprobs), **extra,
    )


def make_set(records, dataset_id="ds", dim=None):
    dim = dim if dim is not None else records[0].q_emb.shape[0]
    return SampleSet(dataset_id=dataset_id, embedding_dim=dim, records=tuple(records))


def random_set(rng, n, dim, dataset_id="ds", tokens=4):
    records = []
    for idx in range(n):
        records.append(
            make_record(
                rec_id=f"{dataset_id}-r{idx:04d}",
                q=rng.standard_normal(dim),
                a=rng.standard_normal(dim),
                i=rng.standard_normal(dim),
                logprobs=-np.abs(rng.standard_normal(tokens)),
            )
        )
    return make_set(records, dataset_id=dataset_id, dim=dim)


def write_jsonl(path: Path, rows) -> Path:
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


def record_row(rec_id="r0", dim=2, q=None, a=None, i=None, logprobs=(-0.5,), **extra):
    unit = [1.0] + [0.0] * (dim - 1)
    row = {
        "id": rec_id,
        "q_emb": list(q) if q is not None else unit,
        "a_emb": list(a) if a is not None else unit,
        "i_emb": list(i) if i is not None else unit,
        "ans_logprobs": list(logprobs),
    }
    row.update(extra)
    return row


def write_manifest(tmp_path: Path, dim, datasets) -> Path:
    """datasets: list of (id, rows) or (id, rows, role)."""
    entries = []
    for item in datasets:
        ds_id, rows = item[0], item[1]
        role = item[2] if len(item) > 2 else "both"
        write_jsonl(tmp_path / f"{ds_id}.jsonl", rows)
        entries.append(
            {"id": ds_id, "role": role, "samples_path": f"{ds_id}.jsonl", "split": "train"}
        )
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"embedding_dim": dim, "datasets": entries}), encoding="utf-8")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
