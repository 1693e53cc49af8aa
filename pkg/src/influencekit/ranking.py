"""Observed-improvement ground truth and rank-agreement evaluation.

Predicted influence scores are judged by Kendall rank correlation against
observed relative improvements, run both ways: for each target, rank the
sources; for each source, rank the targets.  The final figure is the mean
of the two per-axis averages.  The tie-corrected tau-b variant is used
because predicted scores can tie (for example after zeroing a factor); it
reduces to plain tau when no ties exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateInput, IdMismatch, LengthMismatch, ZeroBaseScore
from .matrixio import read_matrix_csv, write_matrix_csv
from .metric import InfluenceMatrix


@dataclass(frozen=True)
class ObservedMatrix:
    """Relative improvements measured after actually fine-tuning, per pair."""

    sources: tuple[str, ...]
    targets: tuple[str, ...]
    deltas: np.ndarray

    @classmethod
    def from_csv(cls, path: str | Path) -> "ObservedMatrix":
        sources, targets, deltas = read_matrix_csv(path)
        return cls(sources, targets, deltas)

    def to_csv(self, path: str | Path) -> None:
        # repr cells keep the write/read cycle bit-exact
        write_matrix_csv(path, self.sources, self.targets, self.deltas, cell="repr")


@dataclass
class TauReport:
    per_target: dict[str, float]
    per_source: dict[str, float]
    mean_target: float
    mean_source: float
    final: float
    degenerate_targets: list[str] = field(default_factory=list)
    degenerate_sources: list[str] = field(default_factory=list)
    exclude_diagonal: bool = True

    @property
    def warning_count(self) -> int:
        return len(self.degenerate_targets) + len(self.degenerate_sources)

    def to_json_obj(self) -> dict:
        return {
            "per_target": self.per_target,
            "per_source": self.per_source,
            "mean_target": self.mean_target,
            "mean_source": self.mean_source,
            "final": self.final,
            "degenerate_targets": self.degenerate_targets,
            "degenerate_sources": self.degenerate_sources,
            "warning_count": self.warning_count,
            "exclude_diagonal": self.exclude_diagonal,
        }


def relative_improvement(base: float, tuned: float) -> float:
    """(tuned - base) / base; the fractional gain over the base score."""
    if base == 0:
        raise ZeroBaseScore("base score is zero, relative improvement undefined")
    return (tuned - base) / base


def kendall_tau(x, y) -> float:
    """Tie-corrected Kendall tau-b between two equally long vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"shapes {x.shape} and {y.shape} differ")
    n = x.shape[0]
    if n < 2:
        raise LengthMismatch(f"need at least 2 entries, got {n}")

    iu = np.triu_indices(n, k=1)
    dx = np.sign(x[:, None] - x[None, :])[iu]
    dy = np.sign(y[:, None] - y[None, :])[iu]

    n0 = n * (n - 1) // 2
    ties_x = int(np.sum(dx == 0))
    ties_y = int(np.sum(dy == 0))
    if ties_x == n0 or ties_y == n0:
        raise DegenerateInput("a vector is constant, ranking undefined")
    concordant_minus_discordant = float(np.sum(dx * dy))
    return concordant_minus_discordant / math.sqrt((n0 - ties_x) * (n0 - ties_y))


def _align(predicted: InfluenceMatrix, observed: ObservedMatrix) -> np.ndarray:
    """Reorder observed deltas to the predicted matrix's id ordering."""
    if set(predicted.sources) != set(observed.sources):
        missing = set(predicted.sources) ^ set(observed.sources)
        raise IdMismatch(f"source ids differ: {sorted(missing)}")
    if set(predicted.targets) != set(observed.targets):
        missing = set(predicted.targets) ^ set(observed.targets)
        raise IdMismatch(f"target ids differ: {sorted(missing)}")
    src_idx = [observed.sources.index(s) for s in predicted.sources]
    tgt_idx = [observed.targets.index(t) for t in predicted.targets]
    return observed.deltas[np.ix_(src_idx, tgt_idx)]


def two_way_eval(
    predicted: InfluenceMatrix,
    observed: ObservedMatrix,
    exclude_diagonal: bool = True,
) -> TauReport:
    """Kendall tau per target over sources and per source over targets.

    Degenerate (constant) rows or columns are recorded and excluded from
    the averages rather than raised.
    """
    deltas = _align(predicted, observed)
    scores = predicted.scores
    sources, targets = predicted.sources, predicted.targets

    per_target: dict[str, float] = {}
    degenerate_targets: list[str] = []
    for j, t in enumerate(targets):
        mask = np.ones(len(sources), dtype=bool)
        if exclude_diagonal and t in sources:
            mask[sources.index(t)] = False
        try:
            per_target[t] = kendall_tau(scores[mask, j], deltas[mask, j])
        except DegenerateInput:
            degenerate_targets.append(t)

    per_source: dict[str, float] = {}
    degenerate_sources: list[str] = []
    for i, s in enumerate(sources):
        mask = np.ones(len(targets), dtype=bool)
        if exclude_diagonal and s in targets:
            mask[targets.index(s)] = False
        try:
            per_source[s] = kendall_tau(scores[i, mask], deltas[i, mask])
        except DegenerateInput:
            degenerate_sources.append(s)

    if not per_target or not per_source:
        raise DegenerateInput("every row or every column is constant")
    mean_target = float(np.mean(list(per_target.values())))
    mean_source = float(np.mean(list(per_source.values())))
    return TauReport(
        per_target=per_target,
        per_source=per_source,
        mean_target=mean_target,
        mean_source=mean_source,
        final=(mean_target + mean_source) / 2,
        degenerate_targets=degenerate_targets,
        degenerate_sources=degenerate_sources,
        exclude_diagonal=exclude_diagonal,
    )
