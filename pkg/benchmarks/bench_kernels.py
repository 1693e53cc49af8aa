"""Benchmark the numba kernels against the pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--points N] [--dim D] [--k K]

Includes a JIT warmup pass so compilation time does not pollute the numba
numbers.  The same comparison can be forced end to end by running any
workload with INFLUENCEKIT_NO_NUMBA=1.
"""

import argparse
import time

import numpy as np

import influencekit.kernels as kernels
from influencekit.diversity import kmeans, silhouette


def timed(fn, *args, repeats=5):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=200_000)
    parser.add_argument("--sil-points", type=int, default=4_000,
                        help="points for the quadratic silhouette kernel")
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(args.seed)
    points = rng.standard_normal((args.points, args.dim))
    centroids = rng.standard_normal((args.k, args.dim))
    labels = rng.integers(0, args.k, args.points)
    small = rng.standard_normal((args.sil_points, args.dim))
    small_labels = rng.integers(0, args.k, args.sil_points)

    print(f"points={args.points} sil_points={args.sil_points} dim={args.dim} k={args.k}")
    print("warming up JIT...")
    kernels.nearest_centroids_nb(small, centroids)
    kernels.cluster_sums_nb(small, small_labels, args.k)
    kernels.sqdist_to_point_nb(small, centroids[0])
    kernels.cluster_distance_sums_nb(small[:256], small_labels[:256], args.k)

    rows = [
        ("nearest_centroids",
         lambda: kernels.nearest_centroids_nb(points, centroids),
         lambda: kernels.nearest_centroids_np(points, centroids)),
        ("cluster_sums",
         lambda: kernels.cluster_sums_nb(points, labels, args.k),
         lambda: kernels.cluster_sums_np(points, labels, args.k)),
        ("sqdist_to_point",
         lambda: kernels.sqdist_to_point_nb(points, centroids[0]),
         lambda: kernels.sqdist_to_point_np(points, centroids[0])),
        ("cluster_distance_sums",
         lambda: kernels.cluster_distance_sums_nb(small, small_labels, args.k),
         lambda: kernels.cluster_distance_sums_np(small, small_labels, args.k)),
    ]

    print(f"{'kernel':<24}{'numba (s)':>12}{'numpy (s)':>12}{'speedup':>10}")
    for name, nb_fn, np_fn in rows:
        t_nb, _ = timed(nb_fn)
        t_np, _ = timed(np_fn)
        print(f"{name:<24}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>9.2f}x")

    # end-to-end clustering comparison via the env flag
    import os

    os.environ.pop("INFLUENCEKIT_NO_NUMBA", None)
    t_nb, a_nb = timed(lambda: kmeans(small, args.k, seed=1), repeats=3)
    s_nb, sil_nb = timed(lambda: silhouette(small, a_nb), repeats=3)
    os.environ["INFLUENCEKIT_NO_NUMBA"] = "1"
    t_np, a_np = timed(lambda: kmeans(small, args.k, seed=1), repeats=3)
    s_np, sil_np = timed(lambda: silhouette(small, a_np), repeats=3)
    os.environ.pop("INFLUENCEKIT_NO_NUMBA", None)

    print(f"{'kmeans (end to end)':<24}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>9.2f}x")
    print(f"{'silhouette (end to end)':<24}{s_nb:>12.4f}{s_np:>12.4f}{s_np / s_nb:>9.2f}x")
    print(f"silhouette agreement: |{sil_nb:.12f} - {sil_np:.12f}| = {abs(sil_nb - sil_np):.2e}")


if __name__ == "__main__":
    main()
