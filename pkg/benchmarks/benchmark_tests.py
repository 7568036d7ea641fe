"""
Benchmark Tests - Timed runs of the acceptance workloads
Each benchmark returns its wall time next to the time budget it should meet
"""
import json
import sys
import time
from datetime import datetime, timezone

import numpy as np

from deepnets.activation import level_for_learning, sigmoid, threshold_for
from deepnets.capacity import estimate_capacity
from deepnets.config import ExperimentConfig
from deepnets.harness import derive_seed, run_sweep_experiment
from deepnets.netcore import PhiBounds, build_approximant, localizer_features
from deepnets.partition import make_partition
from deepnets.targets import make_sparse_target
from deepnets.verify import check_localization, check_sparse_bound, grid_points

KINDS = ["logistic", "tanh", "arctan", "gompertz"]


def _result(elapsed, budget, passed, **extra):
    return {
        "total_time": elapsed,
        "budget": budget,
        "within_budget": budget is None or elapsed <= budget,
        "passed": passed,
        **extra,
    }


def benchmark_localization(grid_pts=41):
    """Benchmark: n=4, d=2 localizer of cell (2, 3) at eps=1e-3 on a 41 x 41 grid"""
    start = time.time()
    report = check_localization(make_partition(4, 2), (2, 3), 1e-3, sigmoid("logistic"), grid_pts)
    elapsed = time.time() - start
    return _result(elapsed, 1.0, report.passed, grid_points=grid_pts, gain=report.gain)


def benchmark_localization_suite(ns=(2, 4, 6), ds=(1, 2, 3), epsilons=(1e-2, 1e-4)):
    """Benchmark: localization checks over n x d x eps x sigmoid kinds"""
    start = time.time()
    checks = 0
    passed = True
    for kind in KINDS:
        spec = sigmoid(kind)
        for n in ns:
            for d in ds:
                part = make_partition(n, d)
                for eps in epsilons:
                    for j in ((1,) * d, (n,) * d):
                        passed = passed and check_localization(part, j, eps, spec, 13).passed
                        checks += 1
    elapsed = time.time() - start
    return _result(elapsed, 30.0, passed, checks=checks)


def benchmark_sparse_approximation(num_targets=20):
    """Benchmark: sparse bound on seeded targets with n = 4N and eps = n^(-d-r)"""
    spec = sigmoid("logistic")
    start = time.time()
    passed = True
    for i in range(num_targets):
        d = 1 + i % 2
        N = 2 + i % 3
        s = 1 + i % 2
        target = make_sparse_target(derive_seed(0, i), N, s, 1.0, 1.0, d)
        n = 4 * N
        eps = n ** (-d - 1.0)
        net = build_approximant(target, make_partition(n, d), "center",
                                threshold_for(spec, eps), spec)
        passed = passed and check_sparse_bound(target, net, eps, 4 * n + 1).passed
    elapsed = time.time() - start
    return _result(elapsed, 60.0, passed, num_targets=num_targets)


def benchmark_sum_bound(max_n=8):
    """Benchmark: sum of localizers at the learning level stays below 2^d + 1"""
    spec = sigmoid("logistic")
    start = time.time()
    passed = True
    for d in (1, 2):
        for n in range(2, max_n + 1):
            level = level_for_learning(spec, n, 1, 1, 1.0, d)
            features = localizer_features(make_partition(n, d), grid_points(d, 4 * n + 1),
                                          level, spec)
            passed = passed and bool(np.abs(features).sum(axis=1).max() <= 2**d + 1)
    elapsed = time.time() - start
    return _result(elapsed, None, passed)


def benchmark_capacity(sample_size=2000):
    """Benchmark: sampled covers against the closed-form bound for n <= 3, d <= 2"""
    spec = sigmoid("logistic")
    start = time.time()
    rows = []
    for d in (1, 2):
        rows += estimate_capacity([1, 2, 3], d, [0.05, 0.1, 0.2], sample_size,
                                  PhiBounds(2.0, 1.0, 4.0), spec, seed=0)
    elapsed = time.time() - start
    return _result(elapsed, 120.0, all(row.consistent for row in rows), rows=len(rows))


def benchmark_rate_sweep(workers=1):
    """Benchmark: the full learning-rate sweep (d=1, r=1, 16 trials)"""
    cfg = ExperimentConfig(seed=0, workers=workers)
    start = time.time()
    outcome = run_sweep_experiment(cfg)
    elapsed = time.time() - start
    return _result(elapsed, 300.0, outcome.summary.slope_pass, slope=outcome.rate.slope,
                   rows=len(outcome.rows))


def run_all_benchmarks():
    """Run all benchmark tests"""
    print("Starting benchmarks...", file=sys.stderr)

    results = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "tests": {}
    }

    print("Running localization benchmark...", file=sys.stderr)
    results["tests"]["localization_41x41"] = benchmark_localization()

    print("Running localization suite benchmark...", file=sys.stderr)
    results["tests"]["localization_suite"] = benchmark_localization_suite()

    print("Running sparse approximation benchmark...", file=sys.stderr)
    results["tests"]["sparse_approximation_20"] = benchmark_sparse_approximation()

    print("Running sum bound benchmark...", file=sys.stderr)
    results["tests"]["sum_bound"] = benchmark_sum_bound()

    print("Running capacity benchmark...", file=sys.stderr)
    results["tests"]["capacity_2000"] = benchmark_capacity()

    print("Running rate sweep benchmark...", file=sys.stderr)
    results["tests"]["rate_sweep"] = benchmark_rate_sweep()

    # JSON on stdout so benchmark_runner.py and CI can parse it
    print(json.dumps(results, indent=2))


if __name__ == "__main__":
    run_all_benchmarks()
