"""Contract tests: mock-model extraction output must satisfy the consumer.

Validation goes through the consumer's CLI (its external interface), not
through imports, so these tests require `influencekit` to be installed.
"""

import json
import subprocess
import sys
from pathlib import Path


from vlmextract import MockBackend, extract, load_config


def run_validate(manifest: Path) -> dict:
    proc = subprocess.run(
        [sys.executable, "-m", "influencekit.cli", "validate", "--manifest", str(manifest)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    return json.loads(proc.stdout)


def read_jsonl(path: Path) -> list[dict]:
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


def test_mock_extract_passes_consumer_validation(toy_config):
    config = load_config(toy_config)
    extract(config, MockBackend(dim=config.embedding_dim))
    report = run_validate(config.out_dir / "manifest.json")
    assert report["ok"] is True
    assert all(not d["errors"] for d in report["datasets"])
    counts = {d["dataset_id"]: d["record_count"] for d in report["datasets"]}
    assert counts == {"toy": 3, "bench": 2}


def test_logprob_lengths_match_mock_token_counts(toy_config):
    config = load_config(toy_config)
    backend = MockBackend(dim=config.embedding_dim)
    extract(config, backend)
    for shard, qa in (("toy", "toy.qa.jsonl"), ("bench", "bench.qa.jsonl")):
        rows = {r["id"]: r for r in read_jsonl(toy_config.parent / qa)}
        for record in read_jsonl(config.out_dir / f"{shard}.jsonl"):
            answer = config.render_answer(rows[record["id"]]["answer"])
            assert len(record["ans_logprobs"]) == len(backend.tokenize(answer))
            assert all(lp <= 0 for lp in record["ans_logprobs"])


def test_ids_and_order_preserved(toy_config):
    config = load_config(toy_config)
    extract(config, MockBackend(dim=config.embedding_dim))
    records = read_jsonl(config.out_dir / "toy.jsonl")
    assert [r["id"] for r in records] == ["t0", "t1", "t2"]
    assert records[0]["question_text"] == "what color is the cat?"
    assert records[0]["answer_text"] == "orange tabby"


def test_rerun_is_resumable_and_stable(toy_config):
    config = load_config(toy_config)
    backend = MockBackend(dim=config.embedding_dim)
    first_stats = extract(config, backend)
    before = (config.out_dir / "toy.jsonl").read_bytes()

    second_stats = extract(config, backend)
    assert (config.out_dir / "toy.jsonl").read_bytes() == before
    assert sum(s.written for s in second_stats) == 0
    assert sum(s.skipped_existing for s in second_stats) == sum(
        s.written for s in first_stats
    )


def test_resume_appends_only_new_records(toy_config):
    config = load_config(toy_config)
    backend = MockBackend(dim=config.embedding_dim)
    extract(config, backend)
    before = read_jsonl(config.out_dir / "toy.jsonl")

    qa_path = toy_config.parent / "toy.qa.jsonl"
    with qa_path.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps({"id": "t3", "image": "img-t3",
                             "question": "new?", "answer": "brand new"}) + "\n")
    stats = extract(config, backend)
    after = read_jsonl(config.out_dir / "toy.jsonl")
    assert after[: len(before)] == before
    assert [r["id"] for r in after] == ["t0", "t1", "t2", "t3"]
    assert next(s for s in stats if s.dataset_id == "toy").written == 1
    # output still satisfies the consumer
    assert run_validate(config.out_dir / "manifest.json")["ok"] is True


def test_failed_records_are_skipped_and_counted(toy_config):
    qa_path = toy_config.parent / "toy.qa.jsonl"
    rows = qa_path.read_text().splitlines()
    rows.insert(1, json.dumps({"id": "broken", "image": "x", "question": "?", "answer": "   "}))
    qa_path.write_text("\n".join(rows) + "\n")

    config = load_config(toy_config)
    stats = extract(config, MockBackend(dim=config.embedding_dim))
    toy_stats = next(s for s in stats if s.dataset_id == "toy")
    assert toy_stats.failed == 1
    assert toy_stats.written == 3
    ids = [r["id"] for r in read_jsonl(config.out_dir / "toy.jsonl")]
    assert "broken" not in ids
    assert run_validate(config.out_dir / "manifest.json")["ok"] is True


def test_producer_tag_passes_through(tmp_path):
    from conftest import qa_row, write_qa

    write_qa(tmp_path / "pool.qa.jsonl", [
        qa_row("p0", producer="gen-a"),
        qa_row("p1", producer="gen-b"),
        qa_row("p2"),
    ])
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({
        "model": "mock", "embedding_dim": 8, "out_dir": "out",
        "datasets": [{"id": "pool", "qa_path": "pool.qa.jsonl"}],
    }))
    config = load_config(config_path)
    extract(config, MockBackend(dim=8))
    records = read_jsonl(config.out_dir / "pool.jsonl")
    assert [r.get("producer") for r in records] == ["gen-a", "gen-b", None]


def test_manifest_reflects_roles_and_dim(toy_config):
    config = load_config(toy_config)
    extract(config, MockBackend(dim=config.embedding_dim))
    manifest = json.loads((config.out_dir / "manifest.json").read_text())
    assert manifest["embedding_dim"] == 12
    by_id = {d["id"]: d for d in manifest["datasets"]}
    assert by_id["toy"]["role"] == "source"
    assert by_id["bench"]["role"] == "target"
    assert by_id["bench"]["split"] == "test"
