"""Target functions in ``Lip^(r, c0)`` and its sparse subclass.

Every target is a frozen, seeded evaluator: identical seeds give bit-identical
functions. Evaluation is vectorized over ``(P, d)`` point arrays.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from deepnets.exceptions import InvalidArgumentError
from deepnets.partition import SupportSet, as_points, make_partition, make_support

__all__ = [
    "TargetKind",
    "SparseTarget",
    "LipschitzReport",
    "TargetDocument",
    "make_lipschitz_target",
    "make_sparse_target",
    "make_constant_target",
    "verify_lipschitz",
    "target_from_document",
]

logger = logging.getLogger(__name__)

_ANCHOR_COUNT = 3
_RATIO_SLACK = 1e-9
_MIN_PAIR_DISTANCE = 1e-4


class TargetKind(str, enum.Enum):
    LIPSCHITZ = "lipschitz"
    SPARSE = "sparse"
    CONSTANT = "constant"


def _check_smoothness(r: float, c0: float) -> None:
    if not 0.0 < r <= 1.0:
        raise InvalidArgumentError(f"smoothness r must lie in (0, 1], got {r}")
    if not c0 > 0.0:
        raise InvalidArgumentError(f"c0 must be positive, got {c0}")


@dataclass(frozen=True)
class SparseTarget:
    """A seeded member of ``Lip^(r, c0)``, optionally supported on ``s`` coarse cells.

    :param TargetKind kind: Construction used by the evaluator
    :param int d: Dimension
    :param float r: Smoothness in ``(0, 1]``
    :param float c0: Lipschitz constant
    :param int seed: Seed the target was drawn from
    :param SupportSet support: Support cells, ``None`` for full support
    :param numpy.ndarray anchors: Anchor points of the full-support construction
    :param float value: The level of a constant target
    """

    kind: TargetKind
    d: int
    r: float
    c0: float
    seed: int
    support: Optional[SupportSet] = None
    anchors: Optional[np.ndarray] = None
    value: float = 0.0

    @property
    def N(self) -> int:
        return self.support.coarse.n if self.support is not None else 1

    @property
    def s(self) -> int:
        return self.support.s if self.support is not None else 1

    @property
    def sup_bound(self) -> float:
        """A priori bound on ``‖f‖_∞``: ``c0 d^{r/2}``, or ``|value|`` for a constant."""
        if self.kind is TargetKind.CONSTANT:
            return abs(self.value)
        return self.c0 * self.d ** (self.r / 2.0)

    def _complement_boxes(self):
        coarse = self.support.coarse
        lower, upper = coarse.corners()
        rest = self.support.complement_positions()
        return lower[rest], upper[rest]

    def __call__(self, x) -> np.ndarray:
        pts = as_points(x, self.d)
        if self.kind is TargetKind.CONSTANT:
            return np.full(pts.shape[0], float(self.value))
        if self.kind is TargetKind.SPARSE and self.anchors is None:
            lo, hi = self._complement_boxes()
            out = np.empty(pts.shape[0])
            for start in range(0, pts.shape[0], 2048):
                block = pts[start:start + 2048, None, :]
                gap = np.maximum(np.maximum(lo[None] - block, 0.0), block - hi[None])
                out[start:start + 2048] = np.sqrt((gap**2).sum(axis=2)).min(axis=1)
            return self.c0 * out**self.r
        dist = np.sqrt(((pts[:, None, :] - self.anchors[None]) ** 2).sum(axis=2)).min(axis=1)
        return self.c0 * dist**self.r

    def sup_norm(self, grid_pts: Optional[int] = None) -> float:
        """Grid estimate of ``‖f‖_∞``; the grid holds every coarse-cell center."""
        if self.kind is TargetKind.CONSTANT:
            return abs(self.value)
        if grid_pts is None:
            grid_pts = 16 * self.N + 1 if self.d <= 2 else 4 * self.N + 1
        axis = np.linspace(0.0, 1.0, grid_pts)
        mesh = np.stack(np.meshgrid(*([axis] * self.d), indexing="ij"), axis=-1)
        return float(np.max(np.abs(self(mesh.reshape(-1, self.d)))))

    def to_document(self) -> "TargetDocument":
        return TargetDocument(
            kind=self.kind.value, seed=self.seed, N=self.N, s=self.s, r=self.r, c0=self.c0,
            d=self.d, value=self.value,
        )


def make_lipschitz_target(
    seed: int, r: float, c0: float, d: int, anchors: Optional[np.ndarray] = None
) -> SparseTarget:
    """``f(x) = c0 min_i ‖x - a_i‖^r`` over three seeded anchors (or the given ones)."""
    _check_smoothness(r, c0)
    if d < 1:
        raise InvalidArgumentError(f"dimension must be positive, got {d}")
    if anchors is None:
        rng = np.random.default_rng(seed)
        points = rng.random((_ANCHOR_COUNT, d))
    else:
        points = np.array(anchors, dtype=float).reshape(-1, d)
        if points.shape[0] == 0:
            raise InvalidArgumentError("at least one anchor is needed")
    points.flags.writeable = False
    return SparseTarget(TargetKind.LIPSCHITZ, d, float(r), float(c0), int(seed), anchors=points)


def make_sparse_target(
    seed: int,
    N: int,
    s: int,
    r: float,
    c0: float,
    d: int,
    indices: Optional[Iterable[Sequence[int]]] = None,
) -> SparseTarget:
    """``f(x) = c0 dist(x, [0,1]^d \\ S)^r`` for a seeded support of ``s`` coarse cells.

    With ``s = N^d`` the complement is empty and the anchor construction of
    :func:`make_lipschitz_target` is used instead, with the same seed.

    :raises InvalidArgumentError: If ``s > N^d``
    """
    _check_smoothness(r, c0)
    coarse = make_partition(N, d)
    if s < 1 or s > coarse.cell_count:
        raise InvalidArgumentError(f"sparsity must lie in 1..{coarse.cell_count}, got {s}")
    if indices is None:
        rng = np.random.default_rng(seed)
        chosen = rng.choice(coarse.cell_count, size=s, replace=False)
        indices = [coarse.unflat(int(pos)) for pos in chosen]
    support = make_support(coarse, indices)
    if support.s != s:
        raise InvalidArgumentError(f"expected {s} support cells, got {support.s}")
    if s == coarse.cell_count:
        full = make_lipschitz_target(seed, r, c0, d)
        return SparseTarget(TargetKind.SPARSE, d, full.r, full.c0, int(seed), support, full.anchors)
    return SparseTarget(TargetKind.SPARSE, d, float(r), float(c0), int(seed), support)


def make_constant_target(value: float, d: int) -> SparseTarget:
    """The constant function; it belongs to every ``Lip^(r, c0)``."""
    if not math.isfinite(value):
        raise InvalidArgumentError(f"constant must be finite, got {value}")
    return SparseTarget(TargetKind.CONSTANT, int(d), 1.0, 1.0, 0, value=float(value))


@dataclass(frozen=True)
class LipschitzReport:
    max_ratio: float
    pairs: int
    passed: bool


def verify_lipschitz(
    f: Callable[[np.ndarray], np.ndarray],
    r: float,
    c0: float,
    pairs: int,
    seed: int,
    d: Optional[int] = None,
) -> LipschitzReport:
    """Largest ``|f(x) - f(x')| / ‖x - x'‖^r`` over sampled pairs.

    Half the pairs are independent uniform points; the other half are close pairs,
    where the ratio of a kinked function is largest. Passes iff the ratio is at most
    ``c0 (1 + 1e-9)``.
    """
    if pairs < 1:
        raise InvalidArgumentError(f"pairs must be positive, got {pairs}")
    if d is None:
        d = getattr(f, "d", None)
        if d is None:
            raise InvalidArgumentError("dimension d is needed for a plain callable")
    rng = np.random.default_rng(seed)
    far = pairs // 2
    x = rng.random((pairs, d))
    other = np.empty_like(x)
    other[:far] = rng.random((far, d))
    step = rng.uniform(-1e-2, 1e-2, size=(pairs - far, d))
    other[far:] = np.clip(x[far:] + step, 0.0, 1.0)
    dist = np.sqrt(((x - other) ** 2).sum(axis=1))
    keep = dist >= _MIN_PAIR_DISTANCE
    if not np.any(keep):
        return LipschitzReport(0.0, 0, True)
    fx = np.asarray(f(x[keep]), dtype=float).reshape(-1)
    fo = np.asarray(f(other[keep]), dtype=float).reshape(-1)
    ratio = float(np.max(np.abs(fx - fo) / dist[keep] ** r))
    return LipschitzReport(ratio, int(keep.sum()), ratio <= c0 * (1.0 + _RATIO_SLACK))


class TargetDocument(BaseModel):
    """JSON description of a target: ``{kind, seed, N, s, r, c0, d}``."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    kind: TargetKind
    seed: int
    N: int = 1
    s: int = 1
    r: float
    c0: float
    d: int
    value: float = 0.0


def target_from_document(doc: Union[TargetDocument, str]) -> SparseTarget:
    """Rebuild a target from its document or its JSON text."""
    if isinstance(doc, str):
        doc = TargetDocument.model_validate_json(doc)
    if doc.kind is TargetKind.CONSTANT:
        return make_constant_target(doc.value, doc.d)
    if doc.kind is TargetKind.LIPSCHITZ:
        return make_lipschitz_target(doc.seed, doc.r, doc.c0, doc.d)
    return make_sparse_target(doc.seed, doc.N, doc.s, doc.r, doc.c0, doc.d)
