"""Batch command line: ``deepnets {localize,approx,capacity,learn,sweep}``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on an invalid
configuration.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from deepnets import __version__
from deepnets.activation import sigmoid, threshold_for
from deepnets.capacity import CAPACITY_FIELDS, estimate_capacity
from deepnets.config import TASKS, ExperimentConfig, load_config
from deepnets.exceptions import DeepNetsError
from deepnets.harness import (
    cells_for_config,
    derive_seed,
    run_sweep_experiment,
    target_for_config,
)
from deepnets.learn import erm_fit, error_decomposition, sample_dataset
from deepnets.netcore import build_approximant
from deepnets.partition import make_partition
from deepnets.report import emit_records, emit_report
from deepnets.targets import make_sparse_target
from deepnets.verify import check_localization, check_sparse_bound

__all__ = ["main", "build_parser", "run_task"]

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INVALID = 2

TaskResult = Tuple[bool, List[str]]

EXIT_CODES_HELP = (
    "exit status: 0 every check passed; 1 a check ran and failed; 2 the run could not be "
    "carried out: invalid config or arguments, or an output path that cannot be written"
)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config; keys mirror ExperimentConfig fields")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", help="output path")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument(
        "--svg", action="store_true", default=None, help="also write a log-log SVG plot"
    )
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    noise.add_argument("-q", "--quiet", action="store_true", help="warnings only")

    parser = argparse.ArgumentParser(
        prog="deepnets",
        description="Constructive two-hidden-layer nets: localization, sparse approximation, "
        "covering numbers and learning-rate sweeps.",
        epilog=EXIT_CODES_HELP,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="task", required=True)
    helps = {
        "localize": "check the localizer of one cell on a grid",
        "approx": "check the sparse approximation bounds on seeded targets",
        "capacity": "estimate covering numbers of sampled nets against the closed-form bound",
        "learn": "fit, then estimate the error decomposition terms",
        "sweep": "learning-rate sweep and slope fit",
    }
    for task in TASKS:
        sub.add_parser(task, parents=[common], help=helps[task], epilog=EXIT_CODES_HELP)
    return parser


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _localize(cfg: ExperimentConfig) -> TaskResult:
    part = make_partition(cfg.n or 4, cfg.d)
    cell = tuple(cfg.cell) if cfg.cell is not None else (1,) * cfg.d
    eps = cfg.epsilon if cfg.epsilon is not None else 1e-3
    grid = cfg.grid_points if cfg.grid_points is not None else 41
    report = check_localization(part, cell, eps, sigmoid(cfg.sigma), grid, cfg.gain)
    record = {"n": part.n, "d": part.d, "cell": list(cell), "sigma": cfg.sigma.value,
              **report.as_record()}
    fields = ["n", "d", "cell", "sigma", *report.as_record()]
    return report.passed, [str(p) for p in emit_records([record], cfg, fields)]


def _approx(cfg: ExperimentConfig) -> TaskResult:
    sigma = sigmoid(cfg.sigma)
    n = cfg.n or 4 * cfg.N
    eps = cfg.epsilon if cfg.epsilon is not None else n ** (-cfg.d - cfg.r)
    gain = cfg.gain if cfg.gain is not None else threshold_for(sigma, eps)
    fine = make_partition(n, cfg.d)
    records = []
    passed = True
    for trial in range(cfg.trials):
        seed = derive_seed(cfg.seed, trial)
        target = make_sparse_target(seed, cfg.N, cfg.s, cfg.r, cfg.c0, cfg.d)
        net = build_approximant(target, fine, "center", gain, sigma)
        report = check_sparse_bound(target, net, eps, cfg.grid_points,
                                    check_off_support=n >= 4 * cfg.N)
        passed = passed and report.passed
        records.append({"trial": trial, "seed": seed, "n": n, "epsilon": eps,
                        **report.as_record()})
        logger.info("approx trial=%d sup_error=%.4g bound1=%.4g pass=%s", trial,
                    report.sup_error, report.bound1, report.passed)
    return passed, [str(p) for p in emit_records(records, cfg, list(records[0]))]


def _capacity(cfg: ExperimentConfig) -> TaskResult:
    rows = estimate_capacity(cfg.n_values, cfg.d, cfg.epsilons, cfg.sample_size, cfg.phi_bounds,
                             sigmoid(cfg.sigma), cfg.seed)
    passed = all(row.consistent for row in rows)
    records = [row.as_record() for row in rows]
    return passed, [str(p) for p in emit_records(records, cfg, CAPACITY_FIELDS)]


def _learn(cfg: ExperimentConfig) -> TaskResult:
    sigma = sigmoid(cfg.sigma)
    records = []
    passed = True
    for m_index, m in enumerate(cfg.m_grid):
        for trial in range(cfg.trials):
            seed = derive_seed(cfg.seed, m_index, trial)
            target = target_for_config(cfg, derive_seed(seed, 0))
            data = sample_dataset(derive_seed(seed, 1), m, target, cfg.tau)
            n = cfg.n or cells_for_config(cfg, m)
            fit = erm_fit(data, n, sigma, N=target.N, s=target.s, r=cfg.r)
            report = error_decomposition(fit, target, data, cfg.mc_points, derive_seed(seed, 2))
            passed = passed and report.holds
            records.append({"m": m, "trial": trial, "seed": seed, **fit.as_record(),
                            **report.as_record()})
    return passed, [str(p) for p in emit_records(records, cfg, list(records[0]))]


def _sweep(cfg: ExperimentConfig) -> TaskResult:
    outcome = run_sweep_experiment(cfg)
    paths = emit_report(outcome, cfg)
    return outcome.summary.passed, [str(p) for p in paths]


_TASKS: Dict[str, Callable[[ExperimentConfig], TaskResult]] = {
    "localize": _localize,
    "approx": _approx,
    "capacity": _capacity,
    "learn": _learn,
    "sweep": _sweep,
}


def run_task(cfg: ExperimentConfig) -> TaskResult:
    """Run the configured task; returns the pass flag and the written paths."""
    return _TASKS[cfg.task](cfg)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    try:
        cfg = load_config(args.config).with_overrides(
            task=args.task, seed=args.seed, output=args.out, format=args.format, svg=args.svg
        )
        passed, paths = run_task(cfg)
    except DeepNetsError as exc:
        logger.error("%s", exc)
        return EXIT_INVALID
    for path in paths:
        print(path)
    logger.info("%s %s", cfg.task, "passed" if passed else "FAILED")
    return EXIT_PASS if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
