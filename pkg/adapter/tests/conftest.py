import json
from pathlib import Path

import pytest


def write_qa(path: Path, rows) -> Path:
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


def qa_row(rec_id, question="what color is the cat?", answer="orange tabby", image=None, **extra):
    row = {
        "id": rec_id,
        "image": image if image is not None else f"img-{rec_id}",
        "question": question,
        "answer": answer,
    }
    row.update(extra)
    return row


@pytest.fixture
def toy_config(tmp_path):
    write_qa(tmp_path / "toy.qa.jsonl", [
        qa_row("t0"),
        qa_row("t1", question="how many dogs?", answer="3"),
        qa_row("t2", question="where is the sign?", answer="on the left wall"),
    ])
    write_qa(tmp_path / "bench.qa.jsonl", [
        qa_row("b0", answer="yes"),
        qa_row("b1", answer="two birds"),
    ])
    config_obj = {
        "model": "mock",
        "embedding_dim": 12,
        "out_dir": "out",
        "batch_size": 2,
        "datasets": [
            {"id": "toy", "qa_path": "toy.qa.jsonl", "role": "source", "split": "train"},
            {"id": "bench", "qa_path": "bench.qa.jsonl", "role": "target", "split": "test"},
        ],
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config_obj), encoding="utf-8")
    return path
