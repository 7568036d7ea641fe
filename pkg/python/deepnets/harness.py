"""Learning-rate sweeps and log-log slope fits against the theoretical exponents."""

from __future__ import annotations

import logging
import math
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import stats

from deepnets.activation import sigmoid
from deepnets.config import ExperimentConfig
from deepnets.exceptions import InvalidArgumentError
from deepnets.learn import FIT_FAMILY, default_bounds, erm_fit, generalization_error, sample_dataset
from deepnets.targets import SparseTarget, make_lipschitz_target, make_sparse_target

__all__ = [
    "SweepRow",
    "RateFitResult",
    "AdvantageReport",
    "SweepSummary",
    "SweepOutcome",
    "theoretical_rate",
    "sparse_rate_factor",
    "cells_for_sample_size",
    "sparse_cells_for_sample_size",
    "sparse_sample_threshold",
    "rate_envelope",
    "derive_seed",
    "target_for_config",
    "cells_for_config",
    "sweep_cells",
    "run_sweep_cell",
    "run_rate_sweep",
    "fit_rate",
    "compare_sparse_dense",
    "summarize_sweep",
    "run_sweep_experiment",
]

logger = logging.getLogger(__name__)

# spawn-key prefixes keep the shared target stream apart from the per-trial streams
_SHARED_TARGET_KEY = 0
_TRIAL_KEY = 1


def _check_rd(r: float, d: int) -> None:
    if not r > 0 or d < 1:
        raise InvalidArgumentError(f"needs r > 0 and d >= 1, got r={r}, d={d}")


def theoretical_rate(r: float, d: int) -> float:
    """The minimax exponent ``-2r/(2r+d)``."""
    _check_rd(r, d)
    return -2.0 * r / (2.0 * r + d)


def sparse_rate_factor(s: int, N: int, d: int, r: float) -> float:
    """The sparse improvement ``(s/N^d)^{d/(2r+d)}``, in ``(0, 1]``."""
    _check_rd(r, d)
    if N < 1 or not 1 <= s <= N**d:
        raise InvalidArgumentError(f"needs 1 <= s <= N^d, got s={s}, N={N}, d={d}")
    return (s / N**d) ** (d / (2.0 * r + d))


def _floor_root(value: float, exponent: float) -> int:
    n = int(math.floor(value ** (1.0 / exponent)))
    # correct a root that lands one ulp below an exact integer
    while (n + 1) ** exponent <= value * (1.0 + 1e-12):
        n += 1
    return max(1, n)


def cells_for_sample_size(m: int, r: float, d: int) -> int:
    """Cells per axis ``n = ⌊m^{1/(2r+d)}⌋``, at least 1."""
    _check_rd(r, d)
    return _floor_root(float(m), 2.0 * r + d)


def sparse_cells_for_sample_size(m: int, s: int, N: int, r: float, d: int) -> int:
    """Cells per axis ``⌊(m s/N^d)^{1/(2r+d)}⌋`` of the sparse schedule, at least 1."""
    _check_rd(r, d)
    return _floor_root(m * s / N**d, 2.0 * r + d)


def sparse_sample_threshold(s: int, N: int, r: float, d: int) -> float:
    """Smallest sample size ``4^{2r+d} N^{2r+2d} / s`` covered by the sparse rate."""
    _check_rd(r, d)
    return 4.0 ** (2 * r + d) * float(N) ** (2 * r + 2 * d) / s


def rate_envelope(m: int, r: float, d: int, B: float, C: float, Xi: float) -> float:
    """Shape ``m^{-2r/(2r+d)} log(B C Ξ m)`` of the dense rate, without its constant."""
    _check_rd(r, d)
    return m ** theoretical_rate(r, d) * math.log(B * C * Xi * m)


def derive_seed(master: int, *key: int) -> int:
    """A 64-bit seed from a master seed and a counter key."""
    seq = np.random.SeedSequence(master, spawn_key=tuple(int(k) for k in key))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SweepRow:
    m: int
    trial: int
    error: float
    seed: int
    n: int
    stderr: float

    def as_record(self) -> Dict[str, object]:
        return {"m": self.m, "trial": self.trial, "error": self.error, "seed": self.seed}


def target_for_config(cfg: ExperimentConfig, seed: int) -> SparseTarget:
    if cfg.target == "sparse":
        return make_sparse_target(seed, cfg.N, cfg.s, cfg.r, cfg.c0, cfg.d)
    return make_lipschitz_target(seed, cfg.r, cfg.c0, cfg.d)


def cells_for_config(cfg: ExperimentConfig, m: int) -> int:
    if cfg.schedule == "sparse":
        return sparse_cells_for_sample_size(m, cfg.s, cfg.N, cfg.r, cfg.d)
    return cells_for_sample_size(m, cfg.r, cfg.d)


def sweep_cells(cfg: ExperimentConfig) -> List[Tuple[int, int, int]]:
    """Every ``(m_index, m, trial)`` cell of the sweep, in table order."""
    if not cfg.m_grid:
        raise InvalidArgumentError("m_grid must not be empty")
    return [(i, m, t) for i, m in enumerate(cfg.m_grid) for t in range(cfg.trials)]


def run_sweep_cell(cfg: ExperimentConfig, m_index: int, m: int, trial: int) -> SweepRow:
    """Fit one fresh dataset and measure the clipped fit's generalization error."""
    trial_seed = derive_seed(cfg.seed, _TRIAL_KEY, m_index, trial)
    if cfg.shared_target:
        target_seed = derive_seed(cfg.seed, _SHARED_TARGET_KEY)
    else:
        target_seed = derive_seed(trial_seed, 0)
    target = target_for_config(cfg, target_seed)
    sigma = sigmoid(cfg.sigma)
    data = sample_dataset(derive_seed(trial_seed, 1), m, target, cfg.tau)
    n = cells_for_config(cfg, m)
    fit = erm_fit(data, n, sigma, N=target.N, s=target.s, r=cfg.r)
    err = generalization_error(fit.predict, target, cfg.mc_points, derive_seed(trial_seed, 2))
    logger.info("sweep m=%d trial=%d n=%d error=%.6g", m, trial, n, err.value)
    return SweepRow(m, trial, err.value, trial_seed, n, err.stderr)


def _ordered(rows: Iterable[SweepRow]) -> List[SweepRow]:
    return sorted(rows, key=lambda row: (row.m, row.trial))


def run_rate_sweep(cfg: ExperimentConfig, executor: Optional[Executor] = None) -> List[SweepRow]:
    """Run every ``(m, trial)`` cell; rows come back sorted by ``(m, trial)``.

    Cells run on ``executor`` when given, on a thread pool when ``cfg.workers > 1``,
    and in order otherwise. Each cell owns its seeds, so the table does not depend on
    scheduling.
    """
    cells = sweep_cells(cfg)
    if executor is None and cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return run_rate_sweep(cfg, pool)
    if executor is None:
        return _ordered(run_sweep_cell(cfg, *cell) for cell in cells)
    futures = [executor.submit(run_sweep_cell, cfg, *cell) for cell in cells]
    return _ordered(f.result() for f in futures)


def _per_m(rows: Sequence[SweepRow]) -> Tuple[List[int], List[float], List[float]]:
    grouped: Dict[int, List[float]] = {}
    for row in rows:
        grouped.setdefault(row.m, []).append(row.error)
    ms = sorted(grouped)
    means, errs = [], []
    for m in ms:
        values = np.asarray(grouped[m])
        means.append(float(values.mean()))
        errs.append(float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0)
    return ms, means, errs


@dataclass(frozen=True)
class RateFitResult:
    """Least squares of log mean error on log m, next to the theoretical exponent.

    ``slope``, ``intercept`` and ``r_squared`` are ``nan`` when ``degenerate``.
    """

    slope: float
    intercept: float
    r_squared: float
    theory_exponent: float
    m_values: Tuple[int, ...]
    mean_errors: Tuple[float, ...]
    std_errors: Tuple[float, ...]
    degenerate: bool

    def within(self, tolerance: float) -> bool:
        return not self.degenerate and abs(self.slope - self.theory_exponent) <= tolerance


def fit_rate(table: Sequence[SweepRow], r: float = 1.0, d: int = 1) -> RateFitResult:
    """Fit the empirical rate from per-m mean errors.

    :raises InvalidArgumentError: With fewer than three distinct sample sizes
    """
    ms, means, errs = _per_m(table)
    theory = theoretical_rate(r, d)
    if len(ms) < 3:
        raise InvalidArgumentError(f"rate fit needs at least 3 distinct m, got {len(ms)}")
    if min(means) <= 0:
        logger.warning("rate fit degenerate: a mean error is not positive")
        nan = float("nan")
        return RateFitResult(nan, nan, nan, theory, tuple(ms), tuple(means), tuple(errs), True)
    fit = stats.linregress(np.log(ms), np.log(means))
    return RateFitResult(
        float(fit.slope), float(fit.intercept), float(fit.rvalue**2), theory,
        tuple(ms), tuple(means), tuple(errs), False,
    )


@dataclass(frozen=True)
class AdvantageReport:
    """Per-m comparison of sparse and dense mean errors."""

    m_values: Tuple[int, ...]
    sparse_means: Tuple[float, ...]
    dense_means: Tuple[float, ...]
    ratios: Tuple[float, ...]
    ratio_bound: float
    min_m: int
    passed: bool


def compare_sparse_dense(
    sparse_rows: Sequence[SweepRow],
    dense_rows: Sequence[SweepRow],
    s: int,
    N: int,
    d: int,
    r: float,
    slack: float = 3.0,
    min_m: int = 1024,
) -> AdvantageReport:
    """Check ``sparse <= dense`` and ``sparse/dense <= slack * factor`` for all ``m >= min_m``."""
    ms, sparse_means, _ = _per_m(sparse_rows)
    dense_ms, dense_means, _ = _per_m(dense_rows)
    if ms != dense_ms:
        raise InvalidArgumentError("sparse and dense sweeps must share their m values")
    bound = slack * sparse_rate_factor(s, N, d, r)
    ratios = [sp / de if de > 0 else math.inf for sp, de in zip(sparse_means, dense_means)]
    passed = all(
        sp <= de and ratio <= bound
        for m, sp, de, ratio in zip(ms, sparse_means, dense_means, ratios)
        if m >= min_m
    )
    return AdvantageReport(
        tuple(ms), tuple(sparse_means), tuple(dense_means), tuple(ratios), bound, min_m, passed
    )


class PerMSummary(BaseModel):
    model_config = ConfigDict(extra="forbid")

    m: int
    n: int
    mean_error: float
    std_error: float
    envelope: float
    sparse_threshold_met: bool


class SweepSummary(BaseModel):
    """JSON summary of a sweep: config echo, fitted slope, exponent and pass flags."""

    model_config = ConfigDict(extra="forbid")

    family: str = FIT_FAMILY
    config: Dict[str, object]
    theory_exponent: float
    slope: Optional[float]
    intercept: Optional[float]
    r_squared: Optional[float]
    degenerate: bool
    slope_tolerance: float
    slope_pass: bool
    sparse_threshold: float
    per_m: List[PerMSummary]
    advantage: Optional[Dict[str, object]] = None
    passed: bool


@dataclass(frozen=True)
class SweepOutcome:
    rows: List[SweepRow]
    rate: RateFitResult
    summary: SweepSummary
    dense_rows: Optional[List[SweepRow]] = None


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def summarize_sweep(
    rows: Sequence[SweepRow],
    cfg: ExperimentConfig,
    dense_rows: Optional[Sequence[SweepRow]] = None,
) -> SweepOutcome:
    """Fit the rate, evaluate envelopes and, with ``dense_rows``, the sparse advantage."""
    rate = fit_rate(rows, cfg.r, cfg.d)
    N, s = (cfg.N, cfg.s) if cfg.target == "sparse" else (1, 1)
    threshold = sparse_sample_threshold(s, N, cfg.r, cfg.d)
    cells = {row.m: row.n for row in rows}
    sigma = sigmoid(cfg.sigma)
    M = cfg.c0 * cfg.d ** (cfg.r / 2.0) + cfg.tau
    per_m = []
    for m, mean, err in zip(rate.m_values, rate.mean_errors, rate.std_errors):
        n = cells[m]
        bounds, _ = default_bounds(sigma, n, cfg.d, M, N=N, s=s, r=cfg.r)
        per_m.append(PerMSummary(
            m=m, n=n, mean_error=mean, std_error=err,
            envelope=rate_envelope(m, cfg.r, cfg.d, *bounds.as_tuple()),
            sparse_threshold_met=m >= threshold,
        ))
    slope_pass = rate.within(cfg.slope_tolerance)
    advantage = None
    passed = slope_pass
    if dense_rows is not None:
        report = compare_sparse_dense(
            rows, dense_rows, cfg.s, cfg.N, cfg.d, cfg.r, cfg.advantage_slack, cfg.advantage_min_m
        )
        advantage = {
            "m": list(report.m_values),
            "sparse_mean": list(report.sparse_means),
            "dense_mean": list(report.dense_means),
            "ratio": list(report.ratios),
            "ratio_bound": report.ratio_bound,
            "min_m": report.min_m,
            "pass": report.passed,
        }
        passed = passed and report.passed
    summary = SweepSummary(
        config=cfg.echo(),
        theory_exponent=rate.theory_exponent,
        slope=_finite_or_none(rate.slope),
        intercept=_finite_or_none(rate.intercept),
        r_squared=_finite_or_none(rate.r_squared),
        degenerate=rate.degenerate,
        slope_tolerance=cfg.slope_tolerance,
        slope_pass=slope_pass,
        sparse_threshold=threshold,
        per_m=per_m,
        advantage=advantage,
        passed=passed,
    )
    return SweepOutcome(list(rows), rate, summary, list(dense_rows) if dense_rows else None)


def run_sweep_experiment(cfg: ExperimentConfig) -> SweepOutcome:
    """The ``sweep`` task: the configured sweep, plus a dense twin when ``compare_dense`` is set."""
    rows = run_rate_sweep(cfg)
    dense_rows = None
    if cfg.compare_dense and cfg.target == "sparse":
        dense_rows = run_rate_sweep(cfg.with_overrides(target="lipschitz"))
    return summarize_sweep(rows, cfg, dense_rows)
