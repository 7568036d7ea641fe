"""Covering numbers of the hypothesis space, sampled and closed-form.

The class cover is approximated by a greedy sup-norm cover of a finite random sample
of ``Φ_{n,2d}`` evaluated on a finite grid. That only ever under-estimates the class
cover, so a comparison against the closed-form upper bound is a sound one-sided test.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
from scipy import stats

from deepnets.activation import SigmoidSpec
from deepnets.exceptions import InvalidArgumentError
from deepnets.netcore import PhiBounds, PhiNetParams, eval_phi_net
from deepnets.verify import grid_points

__all__ = [
    "CoveringEstimate",
    "BoundEvaluation",
    "CapacityRow",
    "sample_phi_net",
    "default_grid",
    "evaluate_family",
    "greedy_cover",
    "greedy_packing",
    "empirical_covering",
    "theoretical_bound",
    "shallow_bound_reference",
    "estimate_capacity",
    "covering_growth_slope",
]

logger = logging.getLogger(__name__)

CAPACITY_FIELDS = [
    "n", "d", "epsilon", "sample_size", "cover_upper", "packing_lower", "theory_log_bound",
]


@dataclass(frozen=True)
class CoveringEstimate:
    """Greedy cover count at ``ε`` and greedy ``2ε``-separated packing count."""

    epsilon: float
    sample_size: int
    grid_size: int
    net_size_upper: int
    packing_lower: int


@dataclass(frozen=True)
class BoundEvaluation:
    """The closed-form log-cover bound next to its simplified ``n^d log(n/ε)`` scale.

    ``log_bound`` is ``inf`` when ``degenerate`` is set.
    """

    log_bound: float
    simplified_scale: float
    degenerate: bool


def sample_phi_net(
    rng: np.random.Generator, n: int, d: int, bounds: PhiBounds, sigma: SigmoidSpec
) -> PhiNetParams:
    """Draw one element of ``Φ_{n,2d}`` uniformly within its bounds.

    Shifts are drawn from ``[-1 - 1/(2n), 1/(2n)]``, where a gate breakpoint lands in
    or next to ``[0, 1]``.
    """
    if n < 1 or d < 1:
        raise InvalidArgumentError(f"n and d must be positive, got n={n}, d={d}")
    units = n**d
    B, C, Xi = bounds.as_tuple()
    low, high = -1.0 - 0.5 / n, 0.5 / n
    c = rng.uniform(-C, C, size=units)
    b = rng.uniform(-B, B, size=units)
    alpha = rng.uniform(-Xi, Xi, size=(units, d))
    alpha_p = rng.uniform(-Xi, Xi, size=(units, d))
    beta = rng.uniform(low, high, size=(units, d))
    gamma = rng.uniform(low, high, size=(units, d))
    return PhiNetParams(
        n=n, d=d, c=c, b=b, alpha=alpha, alpha_p=alpha_p, beta=beta, gamma=gamma,
        bounds=bounds, sigma=sigma,
    )


def default_grid(d: int) -> np.ndarray:
    """64 points for ``d = 1``, a 32 x 32 grid for ``d = 2``, 16 per axis above."""
    return grid_points(d, {1: 64, 2: 32}.get(d, 16))


def evaluate_family(family: Sequence[PhiNetParams], grid: np.ndarray) -> np.ndarray:
    """Function vectors of shape ``(len(family), len(grid))``."""
    return np.stack([np.atleast_1d(eval_phi_net(params, grid)) for params in family])


def _as_family(family: Union[np.ndarray, Sequence[Sequence[float]]]) -> np.ndarray:
    vectors = np.asarray(family, dtype=float)
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise InvalidArgumentError("family must be a nonempty list of equal-length vectors")
    return vectors


def _greedy_centers(vectors: np.ndarray, radius: float) -> List[int]:
    """Scan in order; keep a vector iff it is farther than ``radius`` from every kept one."""
    remaining = np.arange(vectors.shape[0])
    centers = []
    while remaining.size:
        head = int(remaining[0])
        centers.append(head)
        dist = np.max(np.abs(vectors[remaining] - vectors[head]), axis=1)
        remaining = remaining[dist > radius]
    return centers


def greedy_cover(family, eps: float) -> int:
    """Size of the greedy sup-norm ``ε``-net of the family."""
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    return len(_greedy_centers(_as_family(family), eps))


def greedy_packing(family, radius: float) -> int:
    """Size of a greedy subset whose pairwise sup distances all exceed ``radius``."""
    if not radius > 0:
        raise InvalidArgumentError(f"radius must be positive, got {radius}")
    return len(_greedy_centers(_as_family(family), radius))


def empirical_covering(family, eps: float) -> CoveringEstimate:
    """Greedy cover at ``ε`` and packing at ``2ε`` of a sampled family.

    :raises InvalidArgumentError: On an empty family
    """
    vectors = _as_family(family)
    cover = greedy_cover(vectors, eps)
    packing = greedy_packing(vectors, 2.0 * eps)
    return CoveringEstimate(float(eps), vectors.shape[0], vectors.shape[1], cover, packing)


def theoretical_bound(
    eps: float, n: int, d: int, B: float, C: float, Xi: float, C_sigma: float
) -> BoundEvaluation:
    """Closed-form bound on ``log N(ε, Φ_{n,2d})``.

    ``4 d n^d log log(3e(2d+1) C Cσ n^d Ξ / ε)`` plus
    ``n^d log[4 B (24e²)^{2d} (2d+1)^{6d} C^{6d+2} Ξ^{6d} Cσ^{6d+1} n^{6d²+2d} / ε^{6d+2}]``,
    evaluated in log space. Degenerate when either logarithm is not positive.
    """
    if min(eps, B, C, Xi, C_sigma) <= 0 or n < 1 or d < 1:
        raise InvalidArgumentError("theoretical_bound needs positive inputs")
    units = float(n) ** d
    log_a = (math.log(3.0 * math.e * (2 * d + 1)) + math.log(C) + math.log(C_sigma)
             + d * math.log(n) + math.log(Xi) - math.log(eps))
    log_q = (
        math.log(4.0 * B)
        + 2 * d * math.log(24.0 * math.e**2)
        + 6 * d * math.log(2 * d + 1)
        + (6 * d + 2) * math.log(C)
        + 6 * d * math.log(Xi)
        + (6 * d + 1) * math.log(C_sigma)
        + (6 * d * d + 2 * d) * math.log(n)
        - (6 * d + 2) * math.log(eps)
    )
    simplified = units * math.log(n / eps)
    if log_a <= 1.0 or log_q <= 0.0:
        logger.warning("covering bound degenerate at eps=%g, n=%d, d=%d", eps, n, d)
        return BoundEvaluation(math.inf, simplified, True)
    value = 4.0 * d * units * math.log(log_a) + units * log_q
    return BoundEvaluation(value, simplified, False)


def shallow_bound_reference(eps: float, n: int, d: int, gamma_bound: float) -> float:
    """Reference scale ``n^d log(Γ/ε)`` for shallow nets; constant fixed to 1."""
    if min(eps, gamma_bound) <= 0 or n < 1 or d < 1:
        raise InvalidArgumentError("shallow_bound_reference needs positive inputs")
    if gamma_bound < eps:
        raise InvalidArgumentError(f"needs Γ/ε >= 1, got Γ={gamma_bound}, eps={eps}")
    return float(n) ** d * math.log(gamma_bound / eps)


@dataclass(frozen=True)
class CapacityRow:
    n: int
    d: int
    epsilon: float
    sample_size: int
    cover_upper: int
    packing_lower: int
    theory_log_bound: float

    @property
    def consistent(self) -> bool:
        """``log(cover) <= bound`` and ``packing(2ε) <= cover(ε)``."""
        return (math.log(self.cover_upper) <= self.theory_log_bound
                and self.packing_lower <= self.cover_upper)

    def as_record(self) -> dict:
        return {name: getattr(self, name) for name in CAPACITY_FIELDS}


def estimate_capacity(
    n_values: Iterable[int],
    d: int,
    epsilons: Sequence[float],
    sample_size: int,
    bounds: PhiBounds,
    sigma: SigmoidSpec,
    seed: int,
    grid: Optional[np.ndarray] = None,
) -> List[CapacityRow]:
    """One sampled family per ``n``, covered at every radius in ``epsilons``."""
    grid = default_grid(d) if grid is None else grid
    rows = []
    for n in n_values:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(n), d)))
        family = [sample_phi_net(rng, n, d, bounds, sigma) for _ in range(sample_size)]
        vectors = evaluate_family(family, grid)
        for eps in epsilons:
            est = empirical_covering(vectors, eps)
            bound = theoretical_bound(eps, n, d, bounds.B, bounds.C, bounds.Xi, sigma.lipschitz)
            rows.append(CapacityRow(
                n, d, float(eps), sample_size, est.net_size_upper, est.packing_lower,
                bound.log_bound,
            ))
            logger.info("capacity n=%d d=%d eps=%g cover=%d packing=%d log_bound=%.4g",
                        n, d, eps, est.net_size_upper, est.packing_lower, bound.log_bound)
    return rows


def covering_growth_slope(rows: Sequence[CapacityRow], eps: float) -> float:
    """Slope of ``log(cover)`` against ``n^d`` at a fixed radius."""
    picked = [row for row in rows if math.isclose(row.epsilon, eps)]
    if len({row.n for row in picked}) < 2:
        raise InvalidArgumentError("need at least two values of n at this radius")
    x = [float(row.n) ** row.d for row in picked]
    y = [math.log(row.cover_upper) for row in picked]
    return float(stats.linregress(x, y).slope)
