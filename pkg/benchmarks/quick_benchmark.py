"""
Quick benchmark runner - runs small versions of the workloads for sanity checking
"""
import sys
from pathlib import Path

# Add parent directory to path to import from benchmarks
sys.path.insert(0, str(Path(__file__).parent))

from benchmark_tests import (
    benchmark_capacity,
    benchmark_localization,
    benchmark_sparse_approximation,
)


def _line(result):
    mark = "✅" if result["passed"] else "❌"
    return f"{mark} {result['total_time']:.3f}s"


def quick_benchmark():
    """Run a quick benchmark with smaller workloads"""
    print("\n" + "="*70)
    print("QUICK BENCHMARK - Fast sanity check")
    print("="*70 + "\n")

    try:
        import deepnets
        print(f"📦 deepnets {deepnets.__version__}\n")
    except ImportError as e:
        print(f"❌ Failed to import deepnets: {e}")
        return

    print("1️⃣  Localizer on a 41 x 41 grid...", end=" ", flush=True)
    print(_line(benchmark_localization()))

    print("2️⃣  Sparse bound on 4 targets...", end=" ", flush=True)
    print(_line(benchmark_sparse_approximation(num_targets=4)))

    print("3️⃣  Capacity with 200 sampled nets...", end=" ", flush=True)
    print(_line(benchmark_capacity(sample_size=200)))

    print("\n✅ Quick benchmark complete!\n")
    print("💡 Tip: Run 'python benchmarks/benchmark_tests.py' for the full workloads")


if __name__ == "__main__":
    quick_benchmark()
