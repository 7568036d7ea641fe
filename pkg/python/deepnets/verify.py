"""Grid checks of the localization and sparse-approximation guarantees."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from deepnets.activation import SigmoidSpec, threshold_for
from deepnets.exceptions import InvalidArgumentError
from deepnets.netcore import LocalizerNet, SparseApproximant
from deepnets.partition import CubicPartition, overlap_indices
from deepnets.targets import SparseTarget

__all__ = [
    "GridReport",
    "SparseBoundReport",
    "grid_points",
    "default_grid_points",
    "check_localization",
    "check_sparse_bound",
]

logger = logging.getLogger(__name__)


def grid_points(d: int, pts: int) -> np.ndarray:
    """The tensor grid with ``pts`` equispaced points per axis, shape ``(pts^d, d)``."""
    if pts < 2 or d < 1:
        raise InvalidArgumentError(f"grid needs at least 2 points per axis, got {pts}")
    axis = np.linspace(0.0, 1.0, pts)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, d)


def default_grid_points(d: int) -> int:
    return {1: 1001, 2: 101}.get(d, 41)


@dataclass(frozen=True)
class GridReport:
    """Localization measured on a grid.

    ``passed`` holds iff ``max_inside_deficit <= bound_eps`` and ``max_outside_value < bound_eps``.
    """

    grid_points_per_axis: int
    max_inside_deficit: float
    max_outside_value: float
    bound_eps: float
    gain: float
    passed: bool

    def as_record(self) -> dict:
        return {
            "grid_points_per_axis": self.grid_points_per_axis,
            "max_inside_deficit": self.max_inside_deficit,
            "max_outside_value": self.max_outside_value,
            "bound_eps": self.bound_eps,
            "gain": self.gain,
            "pass": self.passed,
        }


def check_localization(
    p: CubicPartition,
    j: Sequence[int],
    eps: float,
    sigma: SigmoidSpec,
    grid_pts: int = 41,
    gain: Optional[float] = None,
) -> GridReport:
    """Evaluate ``N*_{n,j,K}`` on a grid and compare against ``ε``.

    :param float gain: Explicit ``K``; defaults to ``threshold_for(sigma, eps)``
    """
    if grid_pts < 3:
        raise InvalidArgumentError(f"grid_pts must be at least 3, got {grid_pts}")
    if gain is None:
        gain = threshold_for(sigma, eps)
    net = LocalizerNet(p, tuple(j), gain, sigma)
    pts = grid_points(p.d, grid_pts)
    values = net(pts)
    inside = p.contains(net.j, pts)
    deficit = float(np.max(1.0 - values[inside])) if np.any(inside) else 0.0
    outside = float(np.max(values[~inside])) if np.any(~inside) else 0.0
    passed = deficit <= eps and outside < eps
    logger.debug("localization n=%d j=%s K=%.6g deficit=%.3g outside=%.3g", p.n, net.j, gain,
                 deficit, outside)
    return GridReport(grid_pts, deficit, outside, float(eps), float(gain), passed)


@dataclass(frozen=True)
class SparseBoundReport:
    """Sparse approximation measured on a grid.

    ``sup_error`` is taken over grid points inside exactly one fine cell;
    ``boundary_points`` counts the grid points on shared faces, which are left out.
    ``jackson_bound`` is set when ``ε <= n^{-d-r}``.
    """

    grid_points_per_axis: int
    sup_error: float
    bound1: float
    sup_off_support: float
    bound2: float
    sup_norm: float
    boundary_points: int
    off_support_points: int
    jackson_bound: Optional[float]
    constant_suspect: bool
    passed: bool

    def as_record(self) -> dict:
        return {
            "grid_points_per_axis": self.grid_points_per_axis,
            "sup_error": self.sup_error,
            "bound1": self.bound1,
            "sup_off_support": self.sup_off_support,
            "bound2": self.bound2,
            "sup_norm": self.sup_norm,
            "boundary_points": self.boundary_points,
            "off_support_points": self.off_support_points,
            "jackson_bound": self.jackson_bound,
            "constant_suspect": self.constant_suspect,
            "pass": self.passed,
        }


def _off_support_mask(fine: CubicPartition, target: SparseTarget, pts: np.ndarray) -> np.ndarray:
    support = target.support
    near = set()
    for k in support.indices:
        near |= overlap_indices(fine, (support.coarse, k))
    positions = sorted(fine.flat(j) for j in near)
    return ~np.any(fine.membership(pts, positions), axis=1)


def check_sparse_bound(
    f: Union[SparseTarget, Callable[[np.ndarray], np.ndarray]],
    net: SparseApproximant,
    eps: float,
    grid_pts: Optional[int] = None,
    *,
    r: Optional[float] = None,
    c0: Optional[float] = None,
    check_off_support: bool = True,
) -> SparseBoundReport:
    """Compare ``|f - net|`` and the off-support size of ``net`` with their printed bounds.

    ``bound1 = 2^{r/2} c0 n^{-r} + ‖f‖_∞ n^d ε`` and ``bound2 = ‖f‖_∞ n^d ε``. ``‖f‖_∞`` is
    the largest of the grid maximum, the net coefficients and the target's own estimate.

    :param f: The target; a plain callable needs ``r`` and ``c0``
    :raises InvalidArgumentError: If the off-support check is requested with ``n < 4N``
    """
    p = net.partition
    r = getattr(f, "r", None) if r is None else r
    c0 = getattr(f, "c0", None) if c0 is None else c0
    if r is None or c0 is None:
        raise InvalidArgumentError("smoothness r and constant c0 are required")
    support = getattr(f, "support", None)
    off_check = check_off_support and support is not None
    if off_check and p.n < 4 * support.coarse.n:
        raise InvalidArgumentError(
            f"off-support bound needs n >= 4N, got n={p.n}, N={support.coarse.n}"
        )
    grid_pts = default_grid_points(p.d) if grid_pts is None else grid_pts
    pts = grid_points(p.d, grid_pts)
    truth = np.asarray(f(pts), dtype=float).reshape(-1)
    approx = net(pts)

    sup_norm = float(np.max(np.abs(truth)))
    if net.coefficients.size:
        sup_norm = max(sup_norm, float(np.max(np.abs(net.coefficients))))
    if isinstance(f, SparseTarget):
        sup_norm = max(sup_norm, f.sup_norm())

    single = p.cells_containing(pts) == 1
    errors = np.abs(truth - approx)
    sup_error = float(np.max(errors[single])) if np.any(single) else 0.0
    n_eps = p.cell_count * eps
    bound1 = 2.0 ** (r / 2.0) * c0 * p.n ** (-r) + sup_norm * n_eps
    bound2 = sup_norm * n_eps

    sup_off = 0.0
    off_count = 0
    if off_check:
        off = _off_support_mask(p, f, pts)
        off_count = int(off.sum())
        if off_count:
            sup_off = float(np.max(np.abs(approx[off])))

    jackson = None
    if eps <= p.n ** (-p.d - r) * (1.0 + 1e-12):
        jackson = (2.0 ** (r / 2.0) * c0 + sup_norm) * p.n ** (-r)
    suspect = p.d > 2
    if suspect:
        logger.warning("d=%d: the 2^{r/2} grid constant does not grow with d; bound1 is "
                       "reported as printed", p.d)
    passed = sup_error <= bound1 and (not off_check or sup_off <= bound2)
    if not math.isfinite(sup_error):
        passed = False
    return SparseBoundReport(
        grid_pts, sup_error, bound1, sup_off, bound2, sup_norm, int((~single).sum()), off_count,
        jackson, suspect, passed,
    )
