"""Command-line surface: summarize, score, eval-tau, reweight, select, validate.

Every command is a pure function of its input files, flags, and seed;
re-running with identical inputs produces byte-identical artifacts.  All
emitted artifacts embed the format version and the configuration
fingerprint.  Exit codes: 0 success, 1 data or validation error, 2 usage
error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diversity import FieldPolicy
from .errors import FingerprintMismatch, InfluenceKitError, UnknownDatasetId
from .ingest import (
    FORMAT_VERSION,
    Manifest,
    load_manifest,
    load_sample_file,
    load_samples,
    record_to_json_obj,
    validate_manifest,
)
from .matrixio import (
    dump_json,
    format_sig9,
    load_json,
    matrix_to_json_obj,
    read_matrix_csv,
    write_matrix_csv,
)
from .metric import DatasetSummary, Factor, InfluenceMatrix, influence_matrix, summarize
from .ranking import ObservedMatrix, two_way_eval
from .selection import (
    SelectionMode,
    ShortfallPolicy,
    allocate,
    sample_allocation,
    select_instances,
    validity_filter,
)
from .worldgen import WorldSpec, generate_world

_FACTOR_CHOICES = [f.value for f in Factor]


@dataclass(frozen=True)
class RunConfig:
    manifest: Path
    out: Path
    k: int = 10
    seed: int = 42
    field_policy: FieldPolicy = FieldPolicy.QUESTION_ONLY
    exclude_diagonal: bool = True
    format_version: str = FORMAT_VERSION


def _fail(exc: Exception) -> int:
    report = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(report, sort_keys=True), file=sys.stderr)
    return 1


def _positive_int(value: str) -> int:
    parsed = int(value)
    if parsed < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return parsed


def _finite_float(value: str) -> float:
    parsed = float(value)
    if not math.isfinite(parsed):
        raise argparse.ArgumentTypeError(f"must be finite, got {value}")
    return parsed


def _policy(arg: str) -> FieldPolicy:
    return FieldPolicy.QUESTION_ONLY if arg == "question" else FieldPolicy.MEAN_OF_FIELDS


def _summary_path(out: Path, dataset_id: str) -> Path:
    return out / f"{dataset_id}.summary.json"


def _load_summaries(manifest: Manifest, summaries_dir: Path) -> dict[str, DatasetSummary]:
    loaded: dict[str, DatasetSummary] = {}
    for entry in manifest.datasets:
        path = _summary_path(summaries_dir, entry.id)
        if not path.exists():
            raise UnknownDatasetId(f"missing summary file {path}")
        loaded[entry.id] = DatasetSummary.from_json_obj(load_json(path))
    fingerprints = {s.config_fingerprint for s in loaded.values()}
    if len(fingerprints) > 1:
        raise FingerprintMismatch(f"mixed summary fingerprints: {sorted(fingerprints)}")
    return loaded


def cmd_summarize(args) -> int:
    cfg = RunConfig(
        manifest=Path(args.manifest), out=Path(args.out), k=args.k, seed=args.seed,
        field_policy=_policy(args.field_policy),
    )
    manifest = load_manifest(cfg.manifest)
    cfg.out.mkdir(parents=True, exist_ok=True)
    for entry in sorted(manifest.datasets, key=lambda e: e.id):
        sset = load_samples(entry, manifest.embedding_dim)
        summary = summarize(sset, cfg.k, cfg.seed, cfg.field_policy)
        path = _summary_path(cfg.out, entry.id)
        dump_json(path, summary.to_json_obj())
        print(f"wrote {path}")
    return 0


def cmd_score(args) -> int:
    manifest = load_manifest(args.manifest)
    summaries = _load_summaries(manifest, Path(args.summaries))
    drop = frozenset(Factor(d) for d in args.drop or [])

    sources = sorted(e.id for e in manifest.datasets if e.role.is_source)
    targets = sorted(e.id for e in manifest.datasets if e.role.is_target)
    if not sources or not targets:
        raise UnknownDatasetId("manifest needs at least one source and one target dataset")
    matrix = influence_matrix(summaries.values(), sources, targets, drop)
    emitted = np.vectorize(format_sig9)(matrix.scores)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(out / "influence_matrix.csv", sources, targets, emitted, cell="sig9")
    fingerprint = next(iter(summaries.values())).config_fingerprint
    dump_json(
        out / "influence_matrix.json",
        matrix_to_json_obj(
            sources, targets, emitted,
            format_version=FORMAT_VERSION,
            config_fingerprint=fingerprint,
            dropped_factors=sorted(f.value for f in drop),
        ),
    )
    print(f"wrote {out / 'influence_matrix.csv'} ({len(sources)}x{len(targets)})")
    return 0


def cmd_eval_tau(args) -> int:
    p_sources, p_targets, p_scores = read_matrix_csv(args.predicted)
    predicted = InfluenceMatrix(p_sources, p_targets, p_scores)
    observed = ObservedMatrix.from_csv(args.observed)
    report = two_way_eval(predicted, observed, exclude_diagonal=not args.include_diagonal)

    obj = {"format_version": FORMAT_VERSION, **report.to_json_obj()}
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        dump_json(out, obj)
    print(
        f"tau_target_mean={report.mean_target:.3f} "
        f"tau_source_mean={report.mean_source:.3f} "
        f"tau_final={report.final:.3f}"
    )
    return 0


def cmd_reweight(args) -> int:
    matrix_obj = load_json(args.matrix)
    matrix = InfluenceMatrix(
        tuple(matrix_obj["sources"]),
        tuple(matrix_obj["targets"]),
        np.asarray(matrix_obj["scores"], dtype=np.float64),
    )
    scores = matrix.column(args.target)
    counts = allocate(scores, args.budget)

    manifest = load_manifest(args.manifest)
    pools = {
        sid: load_samples(manifest.entry(sid), manifest.embedding_dim)
        for sid, count in counts.items()
        if count > 0
    }
    plan = sample_allocation(
        counts, pools, target_id=args.target, seed=args.seed,
        policy=ShortfallPolicy(args.on_shortfall),
    )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    plan_obj = {
        "format_version": FORMAT_VERSION,
        "config_fingerprint": matrix_obj.get("config_fingerprint", ""),
        "seed": args.seed,
        **plan.to_json_obj(),
    }
    dump_json(out / "allocation_plan.json", plan_obj)
    if args.materialize:
        with (out / "training_set.jsonl").open("w", encoding="utf-8") as fh:
            for sid in sorted(plan.sampled_ids):
                if not plan.sampled_ids[sid]:
                    continue
                by_id = {r.id: r for r in pools[sid].records}
                for rid in plan.sampled_ids[sid]:
                    fh.write(json.dumps(record_to_json_obj(by_id[rid])) + "\n")
    print(f"wrote {out / 'allocation_plan.json'} (budget {plan.budget})")
    return 0


def cmd_select(args) -> int:
    target = DatasetSummary.from_json_obj(load_json(args.target_summary))
    pool = load_sample_file(args.pool, target.embedding_dim, Path(args.pool).stem)
    if args.max_answer_tokens is not None:
        pool = validity_filter(pool, args.max_answer_tokens)

    if args.top_k is not None:
        selected = select_instances(pool, target, SelectionMode.TOP_K, args.top_k)
    else:
        selected = select_instances(pool, target, SelectionMode.THRESHOLD, args.threshold)
    if not selected.items:
        print("warning: selection is empty", file=sys.stderr)

    by_id = {r.id: r for r in pool.records}
    producers: dict[str, int] = {}
    for rid, _ in selected.items:
        producer = by_id[rid].producer
        if producer is not None:
            producers[producer] = producers.get(producer, 0) + 1

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    obj = {
        "format_version": FORMAT_VERSION,
        "config_fingerprint": target.config_fingerprint,
        **selected.to_json_obj(),
    }
    if producers:
        obj["producer_composition"] = dict(sorted(producers.items()))
    dump_json(out / "selected_set.json", obj)
    with (out / "selected.jsonl").open("w", encoding="utf-8") as fh:
        for rid, _ in selected.items:
            fh.write(json.dumps(record_to_json_obj(by_id[rid])) + "\n")

    print(f"selected {len(selected.items)} of {len(pool)} records")
    for producer, count in sorted(producers.items()):
        print(f"producer {producer}: {count}")
    return 0


def cmd_validate(args) -> int:
    manifest = load_manifest(args.manifest)
    report = validate_manifest(manifest)
    print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
    return 0 if report.ok else 1


def cmd_fixtures_generate(args) -> int:
    spec = WorldSpec.from_json_obj(load_json(args.spec))
    world = generate_world(spec, args.out)
    print(f"wrote world with {spec.n_datasets} datasets under {world.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="influencekit",
        description="Training-free influence scoring and data selection "
        "from precomputed embeddings and token log-probabilities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, manifest=True):
        if manifest:
            p.add_argument("--manifest", required=True, help="manifest JSON path")
        p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("summarize", help="write one summary JSON per dataset")
    add_common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=10, help="cluster count for diversity")
    p.add_argument("--field-policy", choices=["question", "mean"], default="question")
    p.set_defaults(fn=cmd_summarize)

    p = sub.add_parser("score", help="emit the influence matrix as CSV and JSON")
    add_common(p)
    p.add_argument("--summaries", required=True, help="directory of summary files")
    p.add_argument("--out", required=True)
    p.add_argument(
        "--drop", action="append", choices=_FACTOR_CHOICES, default=[],
        help="ablate a factor (repeatable)",
    )
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("eval-tau", help="rank agreement of predicted vs observed")
    p.add_argument("--predicted", required=True, help="predicted matrix CSV")
    p.add_argument("--observed", required=True, help="observed matrix CSV")
    p.add_argument("--out", help="tau report JSON path")
    p.add_argument("--include-diagonal", action="store_true")
    p.set_defaults(fn=cmd_eval_tau)

    p = sub.add_parser("reweight", help="allocate a training budget across sources")
    add_common(p)
    p.add_argument("--matrix", required=True, help="influence matrix JSON")
    p.add_argument("--target", required=True, help="target dataset id")
    p.add_argument("--budget", type=_positive_int, required=True)
    p.add_argument("--on-shortfall", choices=["error", "replace"], default="error")
    p.add_argument("--materialize", action="store_true", help="also write the merged JSONL")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_reweight)

    p = sub.add_parser("select", help="pick pool records by instance score")
    p.add_argument("--pool", required=True, help="candidate JSONL file")
    p.add_argument("--target-summary", required=True, help="target summary JSON")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--top-k", type=_positive_int)
    group.add_argument("--threshold", type=_finite_float)
    p.add_argument("--max-answer-tokens", type=int, help="apply the validity filter")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_select)

    p = sub.add_parser("validate", help="check every dataset in a manifest")
    p.add_argument("--manifest", required=True)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("fixtures", help="synthetic world utilities")
    fix_sub = p.add_subparsers(dest="fixtures_command", required=True)
    pg = fix_sub.add_parser("generate", help="generate a planted synthetic world")
    pg.add_argument("--spec", required=True, help="world spec JSON")
    pg.add_argument("--out", required=True)
    pg.set_defaults(fn=cmd_fixtures_generate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InfluenceKitError as exc:
        return _fail(exc)
    except (FileNotFoundError, ValueError, KeyError) as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
