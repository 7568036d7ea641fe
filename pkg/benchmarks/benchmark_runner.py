"""
Benchmark Runner - Compares sequential, threaded and async execution of the rate sweep
"""
import asyncio
import json
import sys
import time
from pathlib import Path

from deepnets import aio
from deepnets.config import ExperimentConfig
from deepnets.harness import run_rate_sweep


class BenchmarkRunner:
    def __init__(self, repo_root, workers=4):
        self.repo_root = Path(repo_root)
        self.benchmarks_dir = self.repo_root / "benchmarks"
        self.results_file = self.benchmarks_dir / "benchmark_results.json"
        self.workers = workers

    def sweep_config(self, **overrides):
        """The sweep every mode runs; only the execution strategy differs"""
        return ExperimentConfig(seed=0, trials=8, m_grid=[256, 512, 1024, 2048], **overrides)

    def run_mode(self, mode):
        """Time one execution mode and return its rows with the wall time"""
        print(f"\n{'='*70}")
        print(f"Running sweep in {mode} mode")
        print(f"{'='*70}")

        start = time.time()
        if mode == "sequential":
            rows = run_rate_sweep(self.sweep_config())
        elif mode == "threaded":
            rows = run_rate_sweep(self.sweep_config(workers=self.workers))
        else:
            rows = asyncio.run(aio.run_rate_sweep(self.sweep_config()))
        elapsed = time.time() - start

        print(f"✅ {len(rows)} cells in {elapsed:.3f}s")
        return {
            "total_time": elapsed,
            "num_cells": len(rows),
            "cells_per_sec": len(rows) / elapsed if elapsed > 0 else 0.0,
            "errors": [row.error for row in rows],
        }

    def compare_results(self, results):
        """Compare timings against the sequential baseline and check the tables agree"""
        print(f"\n{'='*70}")
        print("SWEEP EXECUTION COMPARISON")
        print(f"{'='*70}\n")

        baseline = results["sequential"]
        comparison = {
            "results": {mode: {k: v for k, v in r.items() if k != "errors"}
                        for mode, r in results.items()},
            "comparison": {},
            "timestamp": time.strftime("%Y-%m-%d %H:%M:%S")
        }

        print(f"{'Mode':<20} {'Time':>12} {'Cells/sec':>12} {'Speedup':>12} {'Same table':>12}")
        print("-" * 72)

        for mode, result in results.items():
            speedup = baseline["total_time"] / result["total_time"] if result["total_time"] > 0 else 0
            identical = result["errors"] == baseline["errors"]
            comparison["comparison"][mode] = {
                "speedup": speedup,
                "identical_rows": identical,
            }
            speedup_str = f"{speedup:.2f}x"
            if speedup > 1.05:
                speedup_str = f"🚀 {speedup_str}"
            print(f"{mode:<20} {result['total_time']:>11.4f}s {result['cells_per_sec']:>12.1f} "
                  f"{speedup_str:>12} {'yes' if identical else '❌ no':>12}")

        print("-" * 72)

        if not all(entry["identical_rows"] for entry in comparison["comparison"].values()):
            print("\n❌ Execution modes produced different tables")

        with open(self.results_file, "w") as f:
            json.dump(comparison, f, indent=2)
        print(f"\n📄 Detailed results saved to: {self.results_file}")
        return comparison

    def run(self):
        results = {}
        for mode in ("sequential", "threaded", "async"):
            results[mode] = self.run_mode(mode)
        return self.compare_results(results)


def main():
    repo_root = Path(__file__).parent.parent
    workers = int(sys.argv[1]) if len(sys.argv) > 1 else 4
    comparison = BenchmarkRunner(repo_root, workers=workers).run()
    same = all(entry["identical_rows"] for entry in comparison["comparison"].values())
    sys.exit(0 if same else 1)


if __name__ == "__main__":
    main()
