"""Budget-constrained data allocation and instance-level selection.

Allocation turns per-source influence scores into sample quotas that sum to
the budget exactly, using largest-remainder apportionment (plain rounding
can miss the budget).  Sampling is uniform without replacement via a
Fisher-Yates prefix over file order, driven by PCG64 streams keyed by
(seed, source id) so plans are bit-reproducible across platforms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import AllScoresNonPositive, InsufficientPool
from .ingest import SampleRecord, SampleSet
from .metric import DatasetSummary, instance_score

DEFAULT_SPECIAL_TOKENS = ("<image>", "<img>", "<|", "</s>", "[INST]")


class ShortfallPolicy(str, enum.Enum):
    """What to do when a quota exceeds the source pool."""

    ERROR = "error"
    REPLACE_TAIL = "replace"


class SelectionMode(str, enum.Enum):
    TOP_K = "top-k"
    THRESHOLD = "threshold"


@dataclass(frozen=True)
class AllocationPlan:
    target_id: str
    budget: int
    per_source: dict[str, int]
    sampled_ids: dict[str, list[str]]

    def to_json_obj(self) -> dict:
        return {
            "target_id": self.target_id,
            "budget": self.budget,
            "per_source": self.per_source,
            "sampled_ids": self.sampled_ids,
        }


@dataclass(frozen=True)
class SelectedSet:
    mode: SelectionMode
    parameter: float
    items: tuple[tuple[str, float], ...]  # (record id, score), best first

    def to_json_obj(self) -> dict:
        return {
            "mode": self.mode.value,
            "parameter": self.parameter,
            "items": [{"id": rid, "score": score} for rid, score in self.items],
        }


def allocate(
    scores: dict[str, float],
    budget: int,
    floor_negatives: bool = True,
) -> dict[str, int]:
    """Quotas proportional to the scores, summing to the budget exactly.

    Largest-remainder rounding; remainder ties break by ascending source id.
    Negative scores are floored at zero by default (a negative quota has no
    meaning).
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    weights = {
        sid: (max(v, 0.0) if floor_negatives else v) for sid, v in scores.items()
    }
    total = sum(weights.values())
    if total <= 0 or any(v < 0 for v in weights.values()):
        raise AllScoresNonPositive(
            "allocation needs at least one positive score and no negatives"
        )

    quotas = {sid: budget * w / total for sid, w in weights.items()}
    counts = {sid: math.floor(q) for sid, q in quotas.items()}
    leftover = budget - sum(counts.values())
    by_remainder = sorted(quotas, key=lambda sid: (counts[sid] - quotas[sid], sid))
    for sid in by_remainder[:leftover]:
        counts[sid] += 1
    return counts


def _source_rng(seed: int, source_id: str) -> np.random.Generator:
    entropy = [seed, *source_id.encode("utf-8")]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def _fisher_yates_prefix(n: int, count: int, rng: np.random.Generator) -> list[int]:
    """First `count` entries of a seeded Fisher-Yates shuffle of range(n)."""
    idx = np.arange(n)
    for i in range(min(count, n)):
        j = i + int(rng.integers(n - i))
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:count].tolist()


def sample_allocation(
    counts: dict[str, int],
    sources: dict[str, SampleSet],
    target_id: str,
    seed: int,
    policy: ShortfallPolicy = ShortfallPolicy.ERROR,
) -> AllocationPlan:
    """Draw each source's quota uniformly without replacement, deterministically.

    When a quota exceeds the pool, either raise (default) or keep the full
    pool and fill the tail with replacement.
    """
    sampled: dict[str, list[str]] = {}
    for sid in sorted(counts):
        count = counts[sid]
        if count == 0:
            sampled[sid] = []
            continue
        pool = sources[sid]
        n = len(pool)
        rng = _source_rng(seed, sid)
        if count > n:
            if policy is ShortfallPolicy.ERROR:
                raise InsufficientPool(
                    f"{sid}: quota {count} exceeds pool of {n} records"
                )
            picks = _fisher_yates_prefix(n, n, rng)
            picks += [int(rng.integers(n)) for _ in range(count - n)]
        else:
            picks = _fisher_yates_prefix(n, count, rng)
        sampled[sid] = [pool.records[i].id for i in picks]
    return AllocationPlan(
        target_id=target_id,
        budget=sum(counts.values()),
        per_source=dict(sorted(counts.items())),
        sampled_ids=sampled,
    )


def select_instances(
    pool: SampleSet,
    target: DatasetSummary,
    mode: SelectionMode,
    parameter: float,
) -> SelectedSet:
    """Score every pool record against the target and keep the best.

    TOP_K keeps the min(K, pool) highest scorers; THRESHOLD keeps every
    record scoring at least the given value.  Output is sorted by score
    descending with ties broken by ascending record id.
    """
    scored = [(rec.id, instance_score(rec, target)) for rec in pool.records]
    scored.sort(key=lambda item: (-item[1], item[0]))
    if mode is SelectionMode.TOP_K:
        k = int(parameter)
        if k < 1:
            raise ValueError(f"top-k needs k >= 1, got {parameter}")
        kept = scored[: min(k, len(scored))]
    else:
        if not math.isfinite(parameter):
            raise ValueError(f"threshold must be finite, got {parameter}")
        kept = [item for item in scored if item[1] >= parameter]
    return SelectedSet(mode=mode, parameter=float(parameter), items=tuple(kept))


def validity_filter(
    pool: SampleSet,
    max_answer_tokens: int,
    special_tokens: tuple[str, ...] = DEFAULT_SPECIAL_TOKENS,
) -> SampleSet:
    """Drop records with empty texts, over-long answers, or special tokens.

    Text rules apply only when the text is present; answer length is the
    number of log-probability entries.  Record order is preserved.
    """

    def keep(rec: SampleRecord) -> bool:
        if rec.question_text is not None and not rec.question_text.strip():
            return False
        if rec.answer_text is not None and not rec.answer_text.strip():
            return False
        if len(rec.ans_logprobs) > max_answer_tokens:
            return False
        for text in (rec.question_text, rec.answer_text):
            if text and any(tok in text for tok in special_tokens):
                return False
        return True

    return SampleSet(
        dataset_id=pool.dataset_id,
        embedding_dim=pool.embedding_dim,
        records=tuple(r for r in pool.records if keep(r)),
    )
