"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
"""

import itertools
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from influencekit.diversity import ClusterAssignment, kmeans, normalized_entropy, silhouette
from influencekit.ingest import FieldKind
from influencekit.metric import Factor, ablated_score, influence_score, instance_score
from influencekit.ranking import kendall_tau, two_way_eval
from influencekit.selection import allocate
from influencekit.stats import dataset_perplexity, expected_cosine, pairwise_expected_cosine_oracle
from influencekit.worldgen import ablation_sweep, generate_world, single_signal_spec, varied_spec

from conftest import make_record, make_set, random_set
from make_golden import GOLDEN, golden_commands
from test_diversity import naive_silhouette
from test_metric import make_summary
from test_ranking import brute_force_tau


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


def test_similarity_oracle_equivalence(rng):
    with criterion("similarity oracle equivalence (100 pairs, <=1e-9, <10s)"):
        start = time.perf_counter()
        for trial in range(100):
            dim = int(rng.integers(4, 65))
            a = random_set(rng, int(rng.integers(1, 201)), dim, dataset_id="a")
            b = random_set(rng, int(rng.integers(1, 201)), dim, dataset_id="b")
            kind = list(FieldKind)[trial % 3]
            fast = expected_cosine(a, b, kind)
            slow = pairwise_expected_cosine_oracle(a, b, kind)
            assert abs(fast - slow) <= 1e-9
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_perplexity_criteria(rng):
    with criterion("perplexity: exp(2) fixture 1e-12, exact 1.0, 1000x monotonicity"):
        fixture = make_set([
            make_record(rec_id="r0", logprobs=[-1.0]),
            make_record(rec_id="r1", logprobs=[-3.0]),
        ])
        assert abs(dataset_perplexity(fixture) - math.exp(2)) <= 1e-12

        zeros = make_set([make_record(rec_id=f"r{i}", logprobs=[0.0, 0.0]) for i in range(5)])
        assert dataset_perplexity(zeros) == 1.0

        base_set = random_set(rng, 20, 3, tokens=6)
        base = dataset_perplexity(base_set)
        for _ in range(1000):
            ridx = int(rng.integers(20))
            tidx = int(rng.integers(6))
            records = list(base_set.records)
            lp = records[ridx].ans_logprobs.copy()
            lp[tidx] -= float(rng.uniform(0.001, 2.0))
            records[ridx] = make_record(
                rec_id="perturbed", q=records[ridx].q_emb, a=records[ridx].a_emb,
                i=records[ridx].i_emb, logprobs=lp,
            )
            assert dataset_perplexity(make_set(records)) > base


def test_silhouette_criteria(rng):
    with criterion("silhouette: 50 random sets vs naive <=1e-9, 1-D fixture +-1e-6"):
        for trial in range(50):
            n = int(rng.integers(4, 101))
            dim = int(rng.integers(1, 8))
            points = rng.uniform(-2, 2, size=(n, dim))
            assignment = kmeans(points, int(rng.integers(2, 7)), seed=trial)
            fast = silhouette(points, assignment)
            slow = naive_silhouette(points.tolist(), assignment.labels.tolist())
            assert abs(fast - slow) <= 1e-9

        points = np.array([[0.0], [1.0], [10.0], [11.0]])
        assignment = kmeans(points, 2, seed=0)
        assert abs(silhouette(points, assignment) - 0.899749373433584) <= 1e-6


def test_entropy_criteria():
    with criterion("entropy: uniform exactly 1.0, (0.75, 0.25) within 1e-6"):
        for k, size in ((2, 4), (3, 9), (4, 25), (7, 3)):
            assignment = ClusterAssignment(
                k=k, labels=np.repeat(np.arange(k), size), centroids=np.zeros((k, 1)),
                sizes=np.full(k, size, dtype=np.int64),
            )
            assert normalized_entropy(assignment) == 1.0
        quarters = ClusterAssignment(
            k=2, labels=np.array([0] * 3 + [1]), centroids=np.zeros((2, 1)),
            sizes=np.array([3, 1], dtype=np.int64),
        )
        assert abs(normalized_entropy(quarters) - 0.8112781244591328) <= 1e-6


def test_kendall_criteria(rng):
    with criterion("kendall tau: all permutations n<=8 vs brute force <=1e-12"):
        for n in range(2, 9):
            x = rng.standard_normal(n)
            while len(set(x.tolist())) < n:
                x = rng.standard_normal(n)
            for perm in itertools.permutations(range(n)):
                y = x[list(perm)]
                assert abs(kendall_tau(x, y) - brute_force_tau(x, y)) <= 1e-12
        assert abs(kendall_tau([1, 2, 3, 4], [1, 3, 2, 4]) - 0.666667) <= 1e-6


def test_composition_criteria():
    with criterion("influence/instance composition: derived values 1e-9, ablation identity"):
        source = make_summary("s", perplexity=math.exp(2), sil=0.5, entropy=0.0)
        target = make_summary("t", perplexity=2.0)
        assert abs(influence_score(source, target) - 1.8472640247326626) <= 1e-9

        rec = make_record(logprobs=[-1.0, -3.0])
        assert abs(instance_score(rec, target) - 3.694528049465325) <= 1e-9

        dropped = ablated_score(source, target, frozenset([Factor.DIVERSITY]))
        assert abs(dropped - 3.694528049465325) <= 1e-9

        assert ablated_score(source, target, frozenset()) == influence_score(source, target)


def test_allocation_criteria(rng):
    with criterion("allocation: 10000 cases sum to budget, scale invariant, <5s"):
        start = time.perf_counter()
        for _ in range(10_000):
            n_sources = int(rng.integers(1, 10))
            scores = {f"s{i}": float(rng.uniform(0.001, 10)) for i in range(n_sources)}
            budget = int(rng.integers(1, 100_000))
            counts = allocate(scores, budget)
            assert sum(counts.values()) == budget
            c = float(rng.uniform(0.01, 100))
            assert allocate({k: v * c for k, v in scores.items()}, budget) == counts
        assert allocate({"a": 1.0, "b": 1.0, "c": 1.0}, 10) == {"a": 4, "b": 3, "c": 3}
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"took {elapsed:.1f}s"


def test_end_to_end_synthetic_recovery(tmp_path):
    with criterion("end-to-end: zero-noise 14-dataset world tau=1.0, ablation structure, <2min"):
        start = time.perf_counter()
        spec = varied_spec(n_datasets=14, records_per_dataset=48, embedding_dim=12,
                           noise=0.0, seed=42, k=4)
        world = generate_world(spec, tmp_path / "zero")
        report = two_way_eval(world.matrix, world.observed)
        assert report.final == 1.0
        assert report.warning_count == 0

        for factor in (Factor.PPL, Factor.ISIM):
            signal_spec = single_signal_spec(factor, n_datasets=10, records_per_dataset=40)
            signal_world = generate_world(signal_spec, tmp_path / f"sig_{factor.value}")
            sweep = ablation_sweep(signal_world)
            drops = {name: value for name, value in sweep.items() if name != "none"}
            assert min(drops, key=drops.get) == factor.value
        elapsed = time.perf_counter() - start
        assert elapsed < 120.0, f"took {elapsed:.1f}s"


def test_golden_files(tmp_path, monkeypatch):
    with criterion("golden files: five commands byte-identical on two consecutive runs"):
        monkeypatch.setenv("INFLUENCEKIT_NO_NUMBA", "1")
        from influencekit.cli import main

        world = GOLDEN / "world"
        expected = GOLDEN / "expected"
        expected_files = sorted(
            p.relative_to(expected) for p in expected.rglob("*") if p.is_file()
        )
        assert expected_files, "run tests/make_golden.py first"
        for attempt in ("one", "two"):
            out_dir = tmp_path / attempt
            for argv in golden_commands(world, out_dir):
                assert main([str(a) for a in argv]) == 0
            for rel in expected_files:
                assert (out_dir / rel).read_bytes() == (expected / rel).read_bytes(), rel
