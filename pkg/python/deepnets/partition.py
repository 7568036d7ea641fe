"""Cubic partitions of the unit cube.

A partition with ``n`` cells per axis splits ``[0, 1]^d`` into ``n^d`` closed cubes
``prod_l [(j_l - 1)/n, j_l/n]`` addressed by 1-based multi-indices ``j``. Flat
positions follow lexicographic order of the multi-indices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import FrozenSet, Iterable, Iterator, Sequence, Tuple

import numpy as np
from typing_extensions import TypeAlias

from deepnets.exceptions import InvalidArgumentError, OutOfDomainError

__all__ = [
    "MultiIndex",
    "CubicPartition",
    "SupportSet",
    "make_partition",
    "locate",
    "overlap_indices",
    "make_support",
    "count_free_neurons",
    "as_points",
]

logger = logging.getLogger(__name__)

MultiIndex: TypeAlias = Tuple[int, ...]


def as_points(x, d: int) -> np.ndarray:
    """Coerce ``x`` to a ``(P, d)`` float array and check it lies in the unit cube.

    :param x: A single point (length ``d``) or an array of points
    :param int d: The dimension
    :return: Points as a 2-d array
    :rtype: numpy.ndarray
    :raises OutOfDomainError: If a coordinate is outside ``[0, 1]`` or not finite
    """
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(1, -1) if pts.shape[0] == d else pts.reshape(-1, 1)
    if pts.shape[1] != d:
        raise InvalidArgumentError(f"expected points of dimension {d}, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)) or np.any(pts < 0.0) or np.any(pts > 1.0):
        raise OutOfDomainError("every coordinate must lie in [0, 1]")
    return pts


@dataclass(frozen=True)
class CubicPartition:
    """The uniform grid of ``n^d`` closed cubes on ``[0, 1]^d``.

    :param int n: Cells per axis
    :param int d: Dimension
    """

    n: int
    d: int
    _edges: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise InvalidArgumentError(f"partition needs n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        edges = np.arange(self.n + 1, dtype=float) / self.n
        edges.flags.writeable = False
        object.__setattr__(self, "_edges", edges)

    @property
    def side(self) -> float:
        """Side length ``1/n``."""
        return 1.0 / self.n

    @property
    def cell_count(self) -> int:
        return self.n**self.d

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n,) * self.d

    def check_index(self, j: Sequence[int]) -> MultiIndex:
        """Validate a multi-index and return it as a tuple.

        :raises InvalidArgumentError: On wrong length or a coordinate outside ``1..n``
        """
        idx = tuple(int(v) for v in j)
        if len(idx) != self.d:
            raise InvalidArgumentError(f"multi-index {idx} must have {self.d} coordinates")
        if any(v < 1 or v > self.n for v in idx):
            raise InvalidArgumentError(f"multi-index {idx} has a coordinate outside 1..{self.n}")
        return idx

    def indices(self) -> Iterator[MultiIndex]:
        """All multi-indices in lexicographic order."""
        return product(range(1, self.n + 1), repeat=self.d)

    def flat(self, j: Sequence[int]) -> int:
        idx = self.check_index(j)
        return int(np.ravel_multi_index(tuple(v - 1 for v in idx), self.shape))

    def unflat(self, position: int) -> MultiIndex:
        return tuple(int(v) + 1 for v in np.unravel_index(int(position), self.shape))

    def center(self, j: Sequence[int]) -> np.ndarray:
        idx = np.asarray(self.check_index(j), dtype=float)
        return (2.0 * idx - 1.0) / (2.0 * self.n)

    def bounds(self, j: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        """Lower and upper corner of the closed cell ``j``."""
        idx = np.asarray(self.check_index(j), dtype=int)
        return self._edges[idx - 1], self._edges[idx]

    def centers(self) -> np.ndarray:
        """Centers of every cell, shape ``(n^d, d)``, lexicographic order."""
        grid = np.array(list(self.indices()), dtype=float).reshape(-1, self.d)
        return (2.0 * grid - 1.0) / (2.0 * self.n)

    def corners(self) -> Tuple[np.ndarray, np.ndarray]:
        """Lower and upper corners of every cell, each of shape ``(n^d, d)``."""
        grid = np.array(list(self.indices()), dtype=int).reshape(-1, self.d)
        return self._edges[grid - 1], self._edges[grid]

    def contains(self, j: Sequence[int], x) -> np.ndarray:
        """Closed-cell membership of points in cell ``j``."""
        pts = as_points(x, self.d)
        lo, hi = self.bounds(j)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def membership(self, x, positions: Iterable[int]) -> np.ndarray:
        """Closed-cell membership matrix of shape ``(P, k)`` for the given flat positions."""
        pts = as_points(x, self.d)
        lo_all, hi_all = self.corners()
        pos = np.asarray(list(positions), dtype=int)
        lo, hi = lo_all[pos], hi_all[pos]
        return np.all((pts[:, None, :] >= lo[None]) & (pts[:, None, :] <= hi[None]), axis=2)

    def locate_axis(self, pts: np.ndarray) -> np.ndarray:
        """Smallest 1-based cell coordinate per axis whose closed interval holds the point."""
        n = self.n
        j = np.clip(np.ceil(pts * n).astype(int), 1, n)
        upper = self._edges[1:]
        step_down = (j > 1) & (pts <= upper[np.maximum(j - 2, 0)])
        j = np.where(step_down, j - 1, j)
        step_up = (j < n) & (pts > upper[j - 1])
        return np.where(step_up, j + 1, j)

    def cells_containing(self, x) -> np.ndarray:
        """Number of closed cells holding each point (at most ``2^d``)."""
        pts = as_points(x, self.d)
        interior_edges = self._edges[1:-1]
        on_face = np.isin(pts, interior_edges)
        return np.prod(1 + on_face.astype(int), axis=1)


@dataclass(frozen=True)
class SupportSet:
    """A union ``S`` of coarse cells indexed by ``Λ_s``.

    :param CubicPartition coarse: The ``N``-per-axis partition
    :param frozenset indices: The support indices ``Λ_s``
    """

    coarse: CubicPartition
    indices: FrozenSet[MultiIndex]

    @property
    def s(self) -> int:
        return len(self.indices)

    def positions(self) -> np.ndarray:
        return np.array(sorted(self.coarse.flat(k) for k in self.indices), dtype=int)

    def complement_positions(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.coarse.cell_count), self.positions())

    def contains(self, x) -> np.ndarray:
        """Membership in the closed set ``S``."""
        return np.any(self.coarse.membership(x, self.positions()), axis=1)


def make_partition(n: int, d: int) -> CubicPartition:
    """Create the cubic partition with ``n`` cells per axis in dimension ``d``."""
    return CubicPartition(int(n), int(d))


def locate(p: CubicPartition, x) -> MultiIndex:
    """Return the lexicographically smallest multi-index whose closed cell holds ``x``.

    :param CubicPartition p: The partition
    :param x: A point in ``[0, 1]^d``
    :raises OutOfDomainError: If ``x`` leaves the unit cube
    """
    pts = as_points(x, p.d)
    if pts.shape[0] != 1:
        raise InvalidArgumentError("locate takes a single point")
    return tuple(int(v) for v in p.locate_axis(pts)[0])


def overlap_indices(fine: CubicPartition, coarse_cell: Tuple[CubicPartition, Sequence[int]]) -> set:
    """Fine cells whose closed cube meets the closed coarse cell ``B_{N,k}``.

    Intersection is decided in exact integer arithmetic:
    ``(j-1)/n <= k/N`` and ``j/n >= (k-1)/N`` on every axis.
    """
    coarse, k = coarse_cell
    if fine.d != coarse.d:
        raise InvalidArgumentError(f"dimension mismatch: fine d={fine.d}, coarse d={coarse.d}")
    kk = coarse.check_index(k)
    n, N = fine.n, coarse.n
    per_axis = []
    for k_l in kk:
        per_axis.append([j for j in range(1, n + 1) if (j - 1) * N <= k_l * n and j * N >= (k_l - 1) * n])
    return set(product(*per_axis))


def make_support(coarse: CubicPartition, indices: Iterable[Sequence[int]]) -> SupportSet:
    """Build the support set ``S`` from coarse-cell indices.

    :raises InvalidArgumentError: On an empty, duplicated or out-of-range index set
    """
    checked = [coarse.check_index(k) for k in indices]
    if not checked:
        raise InvalidArgumentError("support index set must be nonempty")
    if len(set(checked)) != len(checked):
        raise InvalidArgumentError("support indices must be distinct")
    return SupportSet(coarse, frozenset(checked))


def count_free_neurons(n: int, N: int, s: int, d: int) -> float:
    """Lower count ``(2d+1) n^d (N^d - 2^d s) / N^d`` of neurons that stay off the support."""
    if n < 4 * N:
        raise InvalidArgumentError(f"needs n >= 4N, got n={n}, N={N}")
    return (2 * d + 1) * n**d * (N**d - 2**d * s) / N**d
