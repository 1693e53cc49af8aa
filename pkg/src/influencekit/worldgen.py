"""Synthetic dataset families with planted structure, for end-to-end checks.

A world spec plants, per dataset, a direction per field (pairwise angles
drive the similarity factors), a mean answer-token log-probability (drives
perplexity), and a cluster count and spread for the question embeddings
(drives the diversity score).  Ground-truth improvements are a scaled,
optionally noise-perturbed copy of the influence matrix computed on the
generated files, so at zero noise the pipeline must recover the planted
ranking exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .diversity import FieldPolicy
from .errors import InvalidSpec
from .ingest import (
    FieldKind,
    Manifest,
    load_manifest,
    load_samples,
)
from .matrixio import dump_json
from .metric import DatasetSummary, Factor, InfluenceMatrix, influence_matrix, summarize
from .ranking import ObservedMatrix, TauReport, two_way_eval

_FIELD_PLANE = {FieldKind.QUESTION: 0, FieldKind.ANSWER: 2, FieldKind.IMAGE: 4}
_CLUSTER_AXIS_BASE = 6
_CLUSTER_TILT = 0.35  # radians between a dataset direction and its cluster centers
_SIDE_FIELD_JITTER = 0.1  # answer/image embeddings scatter around their direction
_TOKEN_JITTER = 0.05
_DELTA_SCALE = 0.2


@dataclass(frozen=True)
class WorldSpec:
    n_datasets: int
    records_per_dataset: int
    embedding_dim: int
    cluster_counts: tuple[int, ...]
    cluster_spreads: tuple[float, ...]
    mean_logprobs: tuple[float, ...]
    angles: dict  # FieldKind -> tuple of per-dataset angles in [0, pi]
    noise: float
    seed: int
    tokens_per_answer: int = 8
    k: int = 10
    field_policy: FieldPolicy = FieldPolicy.QUESTION_ONLY

    def validate(self) -> None:
        n = self.n_datasets
        if n < 2:
            raise InvalidSpec(f"need at least 2 datasets, got {n}")
        if self.records_per_dataset < 2:
            raise InvalidSpec("need at least 2 records per dataset")
        if self.noise < 0:
            raise InvalidSpec(f"noise must be >= 0, got {self.noise}")
        for name, seq in (
            ("cluster_counts", self.cluster_counts),
            ("cluster_spreads", self.cluster_spreads),
            ("mean_logprobs", self.mean_logprobs),
        ):
            if len(seq) != n:
                raise InvalidSpec(f"{name} must have {n} entries, got {len(seq)}")
        if any(c < 1 for c in self.cluster_counts):
            raise InvalidSpec("cluster counts must be >= 1")
        if any(s < 0 for s in self.cluster_spreads):
            raise InvalidSpec("cluster spreads must be >= 0")
        if any(m > 0 for m in self.mean_logprobs):
            raise InvalidSpec("mean log-probabilities must be <= 0")
        for kind in FieldKind:
            thetas = self.angles.get(kind)
            if thetas is None or len(thetas) != n:
                raise InvalidSpec(f"angles[{kind.value}] must have {n} entries")
            if any(not (0.0 <= t <= math.pi) for t in thetas):
                raise InvalidSpec(f"angles[{kind.value}] must lie in [0, pi]")
        min_dim = _CLUSTER_AXIS_BASE + max(self.cluster_counts)
        if self.embedding_dim < min_dim:
            raise InvalidSpec(
                f"embedding_dim must be >= {min_dim} for {max(self.cluster_counts)} clusters"
            )

    @classmethod
    def from_json_obj(cls, obj: dict) -> "WorldSpec":
        try:
            angles = {
                kind: tuple(float(t) for t in obj["angles"][kind.value])
                for kind in FieldKind
            }
            return cls(
                n_datasets=int(obj["n_datasets"]),
                records_per_dataset=int(obj["records_per_dataset"]),
                embedding_dim=int(obj["embedding_dim"]),
                cluster_counts=tuple(int(c) for c in obj["cluster_counts"]),
                cluster_spreads=tuple(float(s) for s in obj["cluster_spreads"]),
                mean_logprobs=tuple(float(m) for m in obj["mean_logprobs"]),
                angles=angles,
                noise=float(obj["noise"]),
                seed=int(obj["seed"]),
                tokens_per_answer=int(obj.get("tokens_per_answer", 8)),
                k=int(obj.get("k", 10)),
                field_policy=FieldPolicy(obj.get("field_policy", "question")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"bad world spec: {exc}") from exc

    def to_json_obj(self) -> dict:
        return {
            "n_datasets": self.n_datasets,
            "records_per_dataset": self.records_per_dataset,
            "embedding_dim": self.embedding_dim,
            "cluster_counts": list(self.cluster_counts),
            "cluster_spreads": list(self.cluster_spreads),
            "mean_logprobs": list(self.mean_logprobs),
            "angles": {kind.value: list(self.angles[kind]) for kind in FieldKind},
            "noise": self.noise,
            "seed": self.seed,
            "tokens_per_answer": self.tokens_per_answer,
            "k": self.k,
            "field_policy": self.field_policy.value,
        }


@dataclass
class SyntheticWorld:
    spec: WorldSpec
    out_dir: Path
    manifest_path: Path
    manifest: Manifest
    observed: ObservedMatrix
    summaries: list[DatasetSummary] = field(default_factory=list)
    matrix: InfluenceMatrix | None = None


def _plane_direction(kind: FieldKind, theta: float, dim: int) -> np.ndarray:
    vec = np.zeros(dim)
    base = _FIELD_PLANE[kind]
    vec[base] = math.cos(theta)
    vec[base + 1] = math.sin(theta)
    return vec


def _jittered_unit(center: np.ndarray, spread: float, rng: np.random.Generator) -> np.ndarray:
    vec = center + spread * rng.standard_normal(center.shape[0])
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return center.copy()
    return vec / norm


def _dataset_records(spec: WorldSpec, d: int, rng: np.random.Generator) -> list[dict]:
    dim = spec.embedding_dim
    m = spec.cluster_counts[d]
    q_dir = _plane_direction(FieldKind.QUESTION, spec.angles[FieldKind.QUESTION][d], dim)
    a_dir = _plane_direction(FieldKind.ANSWER, spec.angles[FieldKind.ANSWER][d], dim)
    i_dir = _plane_direction(FieldKind.IMAGE, spec.angles[FieldKind.IMAGE][d], dim)

    # Cluster centers tilt off the question direction along disjoint axes so
    # the dataset centroid keeps pointing near the planted direction.
    centers = []
    for j in range(m):
        axis = np.zeros(dim)
        axis[_CLUSTER_AXIS_BASE + j] = 1.0
        centers.append(math.cos(_CLUSTER_TILT) * q_dir + math.sin(_CLUSTER_TILT) * axis)

    spread = spec.cluster_spreads[d]
    records = []
    for r in range(spec.records_per_dataset):
        lp = spec.mean_logprobs[d] + _TOKEN_JITTER * rng.standard_normal(spec.tokens_per_answer)
        np.minimum(lp, 0.0, out=lp)
        records.append(
            {
                "id": f"ds{d:02d}-r{r:04d}",
                "q_emb": _jittered_unit(centers[r % m], spread, rng).tolist(),
                "a_emb": _jittered_unit(a_dir, _SIDE_FIELD_JITTER, rng).tolist(),
                "i_emb": _jittered_unit(i_dir, _SIDE_FIELD_JITTER, rng).tolist(),
                "ans_logprobs": lp.tolist(),
            }
        )
    return records


def generate_world(spec: WorldSpec, out_dir: str | Path) -> SyntheticWorld:
    """Write interchange files plus the planted observed matrix.

    The observed improvements are delta = 0.2 * score * exp(eps) with eps
    drawn iid per cell from N(0, noise); noise 0 makes recovery exact.
    """
    spec.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    ids = [f"ds{d:02d}" for d in range(spec.n_datasets)]
    for d, ds_id in enumerate(ids):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.seed, d])))
        lines = [json.dumps(rec) for rec in _dataset_records(spec, d, rng)]
        (out_dir / f"{ds_id}.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")

    manifest_obj = {
        "embedding_dim": spec.embedding_dim,
        "datasets": [
            {"id": ds_id, "role": "both", "samples_path": f"{ds_id}.jsonl", "split": "train"}
            for ds_id in ids
        ],
    }
    manifest_path = out_dir / "manifest.json"
    dump_json(manifest_path, manifest_obj)
    dump_json(out_dir / "world.json", spec.to_json_obj())

    # Score the files exactly as the pipeline will, so the planted truth is a
    # monotone transform of what a clean run recomputes.
    manifest = load_manifest(manifest_path)
    summaries = [
        summarize(load_samples(entry, manifest.embedding_dim), spec.k, spec.seed, spec.field_policy)
        for entry in manifest.datasets
    ]
    matrix = influence_matrix(summaries, ids, ids)

    noise_rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([spec.seed, 0x0B5E12]))
    )
    eps = noise_rng.standard_normal(matrix.scores.shape)
    deltas = _DELTA_SCALE * matrix.scores * np.exp(spec.noise * eps)
    observed = ObservedMatrix(tuple(ids), tuple(ids), deltas)
    observed.to_csv(out_dir / "observed.csv")

    return SyntheticWorld(
        spec=spec,
        out_dir=out_dir,
        manifest_path=manifest_path,
        manifest=manifest,
        observed=observed,
        summaries=summaries,
        matrix=matrix,
    )


def ablation_sweep(
    world: SyntheticWorld,
    drops: tuple[Factor, ...] = tuple(Factor),
    exclude_diagonal: bool = True,
) -> dict[str, float]:
    """Final tau for the full metric and for each single-factor removal."""
    ids = [e.id for e in world.manifest.datasets]
    result: dict[str, float] = {}

    def run(drop: frozenset[Factor]) -> TauReport:
        mat = influence_matrix(world.summaries, ids, ids, drop)
        return two_way_eval(mat, world.observed, exclude_diagonal)

    result["none"] = run(frozenset()).final
    for factor in drops:
        result[factor.value] = run(frozenset([factor])).final
    return result


def varied_spec(
    n_datasets: int = 14,
    records_per_dataset: int = 48,
    embedding_dim: int = 12,
    noise: float = 0.0,
    seed: int = 42,
    k: int = 4,
) -> WorldSpec:
    """A world where every factor varies; good for recovery tests."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0x5EED])))
    angles = {
        kind: tuple(np.sort(rng.uniform(0.0, math.pi / 2, n_datasets)).tolist())
        for kind in FieldKind
    }
    return WorldSpec(
        n_datasets=n_datasets,
        records_per_dataset=records_per_dataset,
        embedding_dim=embedding_dim,
        cluster_counts=tuple(int(c) for c in rng.integers(2, 5, n_datasets)),
        cluster_spreads=tuple(rng.uniform(0.05, 0.4, n_datasets).tolist()),
        mean_logprobs=tuple((-rng.uniform(0.3, 3.0, n_datasets)).tolist()),
        angles=angles,
        noise=noise,
        seed=seed,
        k=k,
    )


def single_signal_spec(
    factor: Factor,
    n_datasets: int = 10,
    records_per_dataset: int = 40,
    embedding_dim: int = 12,
    seed: int = 7,
    k: int = 4,
) -> WorldSpec:
    """A world where one factor carries nearly all the ranking signal.

    The other factors keep a faint wiggle so that dropping the dominant
    factor leaves weak residual structure instead of exact ties.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0xD0E])))
    n = n_datasets

    def faint() -> tuple[float, ...]:
        return tuple((0.2 + 0.02 * rng.random(n)).tolist())

    def wide() -> tuple[float, ...]:
        return tuple(np.linspace(0.05, math.pi / 2, n).tolist())

    angles = {kind: faint() for kind in FieldKind}
    logprobs = tuple((-0.5 - 0.01 * rng.random(n)).tolist())
    if factor is Factor.QSIM:
        angles[FieldKind.QUESTION] = wide()
    elif factor is Factor.ASIM:
        angles[FieldKind.ANSWER] = wide()
    elif factor is Factor.ISIM:
        angles[FieldKind.IMAGE] = wide()
    elif factor is Factor.PPL:
        logprobs = tuple((-np.linspace(0.2, 3.0, n)).tolist())
    else:
        raise InvalidSpec(f"no single-signal construction for {factor}")

    return WorldSpec(
        n_datasets=n,
        records_per_dataset=records_per_dataset,
        embedding_dim=embedding_dim,
        cluster_counts=(3,) * n,
        cluster_spreads=(0.15,) * n,
        mean_logprobs=logprobs,
        angles=angles,
        noise=0.0,
        seed=seed,
        k=k,
    )
