"""Synthetic regression data, the dictionary ERM fit and its error diagnostics.

The fit minimizes the empirical squared risk over the part of ``Φ_{n,2d}`` spanned by
the fixed localizer dictionary ``{N*_{n,j,K}}_j``, with clipped outer weights. Every
result is labelled ``ERM-over-dictionary``.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Tuple, Union

import numpy as np

from deepnets.activation import SigmoidSpec, level_for_learning
from deepnets.exceptions import InvalidArgumentError, ReportWriteError
from deepnets.netcore import (
    PhiBounds,
    PhiNetParams,
    SparseApproximant,
    build_approximant,
    encode_approximant,
    localizer_features,
    project_clip,
)
from deepnets.partition import make_partition
from deepnets.targets import SparseTarget

__all__ = [
    "FIT_FAMILY",
    "Dataset",
    "FitResult",
    "MonteCarloEstimate",
    "DecompositionReport",
    "sample_dataset",
    "default_bounds",
    "erm_fit",
    "empirical_risk",
    "generalization_error",
    "error_decomposition",
]

logger = logging.getLogger(__name__)

FIT_FAMILY = "ERM-over-dictionary"

Evaluator = Callable[[np.ndarray], np.ndarray]
SeedLike = Union[int, np.random.Generator]


@dataclass(frozen=True)
class Dataset:
    """Samples ``(x_i, y_i)`` with ``x_i`` in ``[0,1]^d`` and ``|y_i| <= M``."""

    X: np.ndarray
    y: np.ndarray
    M: float
    seed: Optional[int]
    tau: float
    marginal: str = "uniform"

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float).reshape(-1)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise InvalidArgumentError("X must be (m, d) with one response per row")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.y.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.m

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Write ``x1..xd, y`` rows with a header."""
        path = Path(path)
        names = [f"x{l + 1}" for l in range(self.d)] + ["y"]
        try:
            with path.open("w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=names, lineterminator="\n")
                writer.writeheader()
                for row, target in zip(self.X.tolist(), self.y.tolist()):
                    writer.writerow(dict(zip(names, [*row, target])))
        except OSError as exc:
            raise ReportWriteError(path, exc.strerror or str(exc)) from exc
        return path


def _generator(rng: SeedLike) -> Tuple[np.random.Generator, Optional[int]]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(int(rng)), int(rng)


def sample_dataset(
    rng: SeedLike, m: int, f_rho: SparseTarget, tau: float, d: Optional[int] = None
) -> Dataset:
    """Draw ``m`` uniform inputs and responses ``f_ρ(x) + U[-τ, τ]``.

    ``M = ‖f_ρ‖_∞ + τ`` using the target's a priori sup bound.
    """
    d = f_rho.d if d is None else d
    if d != f_rho.d:
        raise InvalidArgumentError(f"dimension {d} does not match the target's {f_rho.d}")
    if m < 1:
        raise InvalidArgumentError(f"sample size must be positive, got {m}")
    if tau < 0:
        raise InvalidArgumentError(f"noise half-width must be nonnegative, got {tau}")
    gen, seed = _generator(rng)
    X = gen.random((m, d))
    noise = gen.uniform(-tau, tau, size=m) if tau > 0 else np.zeros(m)
    y = f_rho(X) + noise
    return Dataset(X, y, f_rho.sup_bound + tau, seed, float(tau))


def default_bounds(
    sigma: SigmoidSpec, n: int, d: int, M: float, *, N: int = 1, s: int = 1, r: float = 1.0
) -> Tuple[PhiBounds, float]:
    """``Ξ = 2L``, ``B = max(2d, Ξ(2d - 1/2))``, ``C = M``; returns the bounds and ``L``."""
    level = level_for_learning(sigma, n, N, s, r, d)
    xi = 2.0 * level
    return PhiBounds(max(2.0 * d, xi * (2 * d - 0.5)), float(M), xi), level


@dataclass(frozen=True)
class FitResult:
    """Outcome of :func:`erm_fit`; ``estimator`` carries the clipped outer weights."""

    estimator: SparseApproximant
    empirical_risk: float
    bounds: PhiBounds
    level: float
    n: int
    m: int
    M: float
    risk_history: Tuple[float, ...]
    sweeps: int
    converged: bool
    family: str = FIT_FAMILY
    occupied: int = field(default=0)

    def predict(self, x) -> np.ndarray:
        """``π_M f_{D,n}``, the fitted net clipped to ``[-M, M]``."""
        raw = self.estimator(x)
        if self.M <= 0:
            return np.zeros_like(raw)
        return project_clip(raw, self.M)

    def to_phi_params(self) -> PhiNetParams:
        return encode_approximant(self.estimator, self.bounds)

    def as_record(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "m": self.m,
            "M": self.M,
            "level": self.level,
            "bounds": list(self.bounds.as_tuple()),
            "empirical_risk": self.empirical_risk,
            "sweeps": self.sweeps,
            "converged": self.converged,
        }


def _objective(G: np.ndarray, b: np.ndarray, c: np.ndarray, y_sq: float) -> float:
    return max(float(c @ G @ c - 2.0 * b @ c + y_sq), 0.0)


def erm_fit(
    D: Dataset,
    n: int,
    sigma: SigmoidSpec,
    bounds: Optional[PhiBounds] = None,
    *,
    N: int = 1,
    s: int = 1,
    r: float = 1.0,
    max_sweeps: int = 1000,
    tol: float = 1e-10,
) -> FitResult:
    """Clipped least squares over the localizer dictionary.

    Projected coordinate descent from ``c = 0`` in lexicographic cell order; stops when
    the largest coordinate change of a sweep is at most ``tol`` or after ``max_sweeps``.
    Cells holding no sample keep the coefficient 0.

    :param PhiBounds bounds: ``(B_n, C_n, Ξ_n)``; defaults from :func:`default_bounds`,
        which uses ``N``, ``s`` and ``r`` for the level ``L``
    :raises InvalidArgumentError: On an empty dataset or ``n < 1``
    """
    if D.m == 0:
        raise InvalidArgumentError("cannot fit an empty dataset")
    if n < 1:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    if bounds is None:
        bounds, level = default_bounds(sigma, n, D.d, D.M, N=N, s=s, r=r)
    else:
        level = bounds.Xi / 2.0
    if not bounds.Xi > 0:
        raise InvalidArgumentError("Ξ_n must be positive")
    gain = bounds.Xi / 2.0
    partition = make_partition(n, D.d)
    features = localizer_features(partition, D.X, gain, sigma)
    m = D.m
    gram = features.T @ features / m
    rhs = features.T @ D.y / m
    y_sq = float(D.y @ D.y / m)
    occupied = np.flatnonzero(
        np.any(partition.membership(D.X, range(partition.cell_count)), axis=0)
    )

    c = np.zeros(partition.cell_count)
    history = [_objective(gram, rhs, c, y_sq)]
    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        largest = 0.0
        for j in occupied:
            diag = gram[j, j]
            if diag <= 0.0:
                continue
            updated = min(bounds.C, max(-bounds.C, c[j] + (rhs[j] - gram[j] @ c) / diag))
            largest = max(largest, abs(updated - c[j]))
            c[j] = updated
        history.append(_objective(gram, rhs, c, y_sq))
        logger.debug("sweep %d objective %.12g change %.3g", sweeps, history[-1], largest)
        if largest <= tol:
            converged = True
            break

    estimator = SparseApproximant(partition, c, partition.centers(), gain, sigma)
    risk = empirical_risk(estimator, D)
    logger.info("fit n=%d m=%d sweeps=%d converged=%s risk=%.6g", n, m, sweeps, converged, risk)
    return FitResult(
        estimator, risk, bounds, float(level), n, m, D.M, tuple(history), sweeps, converged,
        occupied=int(occupied.size),
    )


def empirical_risk(f: Evaluator, D: Dataset) -> float:
    """``(1/m) Σ (f(x_i) - y_i)²``."""
    if D.m == 0:
        raise InvalidArgumentError("empirical risk of an empty dataset")
    residual = np.asarray(f(D.X), dtype=float).reshape(-1) - D.y
    return float(np.mean(residual**2))


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    points: int


def _mc_points(seed: int, points: int, d: int) -> np.ndarray:
    if points < 1:
        raise InvalidArgumentError(f"mc_points must be positive, got {points}")
    return np.random.default_rng(seed).random((points, d))


def _mean_with_error(samples: np.ndarray) -> MonteCarloEstimate:
    k = samples.shape[0]
    stderr = float(np.std(samples, ddof=1) / math.sqrt(k)) if k > 1 else 0.0
    return MonteCarloEstimate(float(np.mean(samples)), stderr, k)


def generalization_error(
    f: Evaluator, f_rho: SparseTarget, mc_points: int, seed: int, d: Optional[int] = None
) -> MonteCarloEstimate:
    """Monte Carlo estimate of ``‖f - f_ρ‖²`` under the uniform marginal."""
    d = f_rho.d if d is None else d
    X = _mc_points(seed, mc_points, d)
    diff = np.asarray(f(X), dtype=float).reshape(-1) - f_rho(X)
    return _mean_with_error(diff**2)


@dataclass(frozen=True)
class DecompositionReport:
    """The three terms bounding the excess risk of ``π_M f_{D,n}``.

    ``holds`` iff ``excess <= approx_D_n + S1 + S2 + 2 stderr`` and the approximation term
    stays under ``approx_bound = (2^{r/2} c0 n^{-r} + ‖f‖_∞ n^d ε_K)²``, with ``ε_K`` the
    sigmoid's tail size at the fit's gain. The first inequality reduces to the empirical
    risk of the fit not exceeding the comparator's, reported as ``empirical_gap``.
    """

    excess: float
    approx_D_n: float
    S1: float
    S2: float
    stderr: float
    holds: bool
    approx_bound: float = math.inf
    empirical_gap: float = 0.0

    @property
    def total(self) -> float:
        return self.approx_D_n + self.S1 + self.S2

    @property
    def approx_holds(self) -> bool:
        return self.approx_D_n <= self.approx_bound

    def as_record(self) -> dict:
        return {
            "excess": self.excess,
            "approx_D_n": self.approx_D_n,
            "approx_bound": self.approx_bound,
            "S1": self.S1,
            "S2": self.S2,
            "empirical_gap": self.empirical_gap,
            "stderr": self.stderr,
            "holds": self.holds,
        }


def _approximation_bound(f_rho: SparseTarget, comparator: SparseApproximant) -> float:
    p = comparator.partition
    tail = float(max(comparator.sigma.complement(comparator.K),
                     comparator.sigma.lower_tail(comparator.K)))
    sup_norm = max(f_rho.sup_norm(), float(np.max(np.abs(comparator.coefficients))))
    if p.d > 8:
        # the cell diameter outgrows the 2^{r/2} n^{-r} grid term
        return math.inf
    sup_error = 2.0 ** (f_rho.r / 2.0) * f_rho.c0 * p.n ** (-f_rho.r) + sup_norm * p.cell_count * tail
    return sup_error**2


def error_decomposition(
    fit: FitResult, f_rho: SparseTarget, D: Dataset, mc_points: int, seed: int = 0
) -> DecompositionReport:
    """Estimate ``D_n``, ``S1`` and ``S2`` on one shared set of Monte Carlo points.

    The comparator is the constructed net with coefficients ``f_ρ(ξ_j)`` at the fit's
    gain. Risks add the uniform noise variance ``τ²/3``.
    """
    est = fit.estimator
    X = _mc_points(seed, mc_points, D.d)
    truth = f_rho(X)
    noise_var = D.tau**2 / 3.0
    comparator = build_approximant(f_rho, est.partition, "center", est.K, est.sigma)

    excess = _mean_with_error((fit.predict(X) - truth) ** 2)
    approx = float(np.mean((comparator(X) - truth) ** 2))
    comparator_risk = empirical_risk(comparator, D)
    fit_risk = empirical_risk(fit.predict, D)
    s1 = comparator_risk - (approx + noise_var)
    s2 = (excess.value + noise_var) - fit_risk
    total = approx + s1 + s2
    bound = _approximation_bound(f_rho, comparator)
    # rounding slack for the noiseless case, where both sides can be exactly equal
    holds = excess.value <= total + 2.0 * excess.stderr + 1e-12 * max(1.0, abs(total))
    if approx > bound:
        logger.warning("approximation term %.6g exceeds its bound %.6g", approx, bound)
        holds = False
    return DecompositionReport(
        excess.value, approx, s1, s2, excess.stderr, holds, bound, comparator_risk - fit_risk
    )
