"""Evaluation of the constructed two-hidden-layer nets.

The first hidden layer is made of heaviside gates ``σ0(±x^(l) + shift)``, the second
of sigmoids. Every function here accepts either one point or an array of points and
returns a float or a 1-d array accordingly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from deepnets.activation import SigmoidSpec, heaviside_array, sigmoid
from deepnets.exceptions import InvalidArgumentError
from deepnets.partition import CubicPartition, MultiIndex, as_points

__all__ = [
    "LocalizerNet",
    "SparseApproximant",
    "PhiBounds",
    "PhiNetParams",
    "ShallowNetParams",
    "ParamViolation",
    "localizer_features",
    "eval_localizer",
    "eval_sparse_approximant",
    "build_approximant",
    "eval_phi_net",
    "validate_params",
    "encode_localizer",
    "encode_approximant",
    "project_clip",
    "eval_shallow",
    "PhiNetDocument",
    "phi_params_to_json",
    "phi_params_from_json",
]

logger = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], np.ndarray]

_CHUNK = 4096


def _ordered_sum(features: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    """``features @ coefficients``, each row summed exactly in order of decreasing ``|c_j|``."""
    order = np.argsort(-np.abs(coefficients), kind="stable")
    terms = features[:, order] * coefficients[order]
    return np.fromiter((math.fsum(row) for row in terms), dtype=float, count=terms.shape[0])


def localizer_features(
    partition: CubicPartition, x, gain: float, sigma: SigmoidSpec
) -> np.ndarray:
    """All localizers ``N*_{n,j,K}`` at once, shape ``(P, n^d)``.

    ``σ0(1/(2n) + x - ξ_j)`` is evaluated as ``σ0(x - (j-1)/n)`` and
    ``σ0(1/(2n) - x + ξ_j)`` as ``σ0(j/n - x)``: the same reals, with the cell edges
    shared with closed-cell membership so the gates flip exactly at the faces.
    """
    pts = as_points(x, partition.d)
    lower, upper = partition.corners()
    d = partition.d
    out = np.empty((pts.shape[0], partition.cell_count))
    for start in range(0, pts.shape[0], _CHUNK):
        block = pts[start:start + _CHUNK, None, :]
        count = heaviside_array(block - lower[None]).sum(axis=2)
        count += heaviside_array(upper[None] - block).sum(axis=2)
        out[start:start + _CHUNK] = sigma(2.0 * gain * (count - 2 * d + 0.5))
    return out


@dataclass(frozen=True)
class LocalizerNet:
    """The localizer of one cell.

    :param CubicPartition partition: The fine partition
    :param tuple j: The cell's multi-index
    :param float K: The gate gain
    :param SigmoidSpec sigma: Second-layer activation
    """

    partition: CubicPartition
    j: MultiIndex
    K: float
    sigma: SigmoidSpec

    def __post_init__(self):
        object.__setattr__(self, "j", self.partition.check_index(self.j))
        if not self.K > 0:
            raise InvalidArgumentError(f"gate gain K must be positive, got {self.K}")

    def __call__(self, x) -> np.ndarray:
        pts = as_points(x, self.partition.d)
        lo, hi = self.partition.bounds(self.j)
        d = self.partition.d
        count = heaviside_array(pts - lo).sum(axis=1) + heaviside_array(hi - pts).sum(axis=1)
        return self.sigma(2.0 * self.K * (count - 2 * d + 0.5))


def eval_localizer(net: LocalizerNet, x) -> Union[float, np.ndarray]:
    """Evaluate ``N*_{n,j,K}``; a single point gives a float."""
    values = net(x)
    return float(values[0]) if values.shape[0] == 1 else values


@dataclass(frozen=True)
class SparseApproximant:
    """``Σ_j c_j N*_{n,j,K}(x)`` with one anchor ``η_j`` per cell.

    :param CubicPartition partition: The fine partition
    :param numpy.ndarray coefficients: ``c_j`` in lexicographic cell order
    :param numpy.ndarray anchors: ``η_j``, shape ``(n^d, d)``
    :param float K: Gate gain
    :param SigmoidSpec sigma: Second-layer activation
    """

    partition: CubicPartition
    coefficients: np.ndarray
    anchors: np.ndarray
    K: float
    sigma: SigmoidSpec

    def __post_init__(self):
        p = self.partition
        c = np.array(self.coefficients, dtype=float).reshape(-1)
        a = np.array(self.anchors, dtype=float).reshape(-1, p.d)
        if c.shape[0] != p.cell_count or a.shape[0] != p.cell_count:
            raise InvalidArgumentError(f"need {p.cell_count} coefficients and anchors")
        if not np.all(np.isfinite(c)):
            raise InvalidArgumentError("coefficients must be finite")
        if not self.K > 0:
            raise InvalidArgumentError(f"gate gain K must be positive, got {self.K}")
        lower, upper = p.corners()
        outside = ~np.all((a >= lower) & (a <= upper), axis=1)
        if np.any(outside):
            bad = p.unflat(int(np.flatnonzero(outside)[0]))
            raise InvalidArgumentError(f"anchor for cell {bad} lies outside its cell")
        c.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "anchors", a)

    def coefficient(self, j: Sequence[int]) -> float:
        return float(self.coefficients[self.partition.flat(j)])

    def coefficient_map(self) -> Dict[MultiIndex, float]:
        return {j: float(c) for j, c in zip(self.partition.indices(), self.coefficients)}

    def features(self, x) -> np.ndarray:
        return localizer_features(self.partition, x, self.K, self.sigma)

    def __call__(self, x) -> np.ndarray:
        return _ordered_sum(self.features(x), self.coefficients)


def eval_sparse_approximant(net: SparseApproximant, x) -> Union[float, np.ndarray]:
    values = net(x)
    return float(values[0]) if values.shape[0] == 1 else values


def build_approximant(
    f: Evaluator,
    p: CubicPartition,
    anchor_rule: Union[str, np.ndarray, Mapping[MultiIndex, Sequence[float]]],
    K: float,
    sigma: SigmoidSpec,
) -> SparseApproximant:
    """Sample ``f`` at one anchor per cell and wrap the values as a sparse approximant.

    :param f: Vectorized evaluator taking a ``(P, d)`` array
    :param CubicPartition p: The fine partition
    :param anchor_rule: ``"center"``, an ``(n^d, d)`` array, or a mapping from
        multi-index to anchor
    :raises InvalidArgumentError: If an anchor lies outside its cell
    """
    if isinstance(anchor_rule, str):
        if anchor_rule != "center":
            raise InvalidArgumentError(f"unknown anchor rule {anchor_rule!r}")
        anchors = p.centers()
    elif isinstance(anchor_rule, Mapping):
        anchors = np.array([anchor_rule[j] for j in p.indices()], dtype=float).reshape(-1, p.d)
    else:
        anchors = np.asarray(anchor_rule, dtype=float).reshape(-1, p.d)
    # containment is checked before f is called on the anchors
    lower, upper = p.corners()
    if anchors.shape[0] != p.cell_count:
        raise InvalidArgumentError(f"need {p.cell_count} anchors, got {anchors.shape[0]}")
    inside = np.all((anchors >= lower) & (anchors <= upper), axis=1)
    if not np.all(inside):
        bad = p.unflat(int(np.flatnonzero(~inside)[0]))
        raise InvalidArgumentError(f"anchor for cell {bad} lies outside its cell")
    values = np.asarray(f(anchors), dtype=float).reshape(-1)
    return SparseApproximant(p, values, anchors, K, sigma)


@dataclass(frozen=True)
class PhiBounds:
    """The bound triple ``(B_n, C_n, Ξ_n)`` of the hypothesis space."""

    B: float
    C: float
    Xi: float

    def __post_init__(self):
        if min(self.B, self.C, self.Xi) < 0:
            raise InvalidArgumentError("bounds must be nonnegative")

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.B, self.C, self.Xi)


@dataclass(frozen=True)
class ParamViolation:
    """A single bound breach; ``unit`` is 1-based."""

    unit: int
    field: str
    value: float
    bound: float


@dataclass(frozen=True)
class PhiNetParams:
    """An element of ``Φ_{n,2d}``.

    Unit ``j`` computes
    ``c_j σ(Σ_l α_{j,l} σ0(x^(l) + β_{j,l}) + Σ_l α'_{j,l} σ0(±x^(l) + γ_{j,l}) + b_j)``.
    The sign in the second sum is ``-`` where ``gamma_reflect`` is set; that orientation
    is needed to encode a localizer and is off otherwise.
    """

    n: int
    d: int
    c: np.ndarray
    b: np.ndarray
    alpha: np.ndarray
    alpha_p: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    bounds: PhiBounds
    sigma: SigmoidSpec
    gamma_reflect: np.ndarray = field(default=None)

    def __post_init__(self):
        units = self.n**self.d
        shapes = {"c": (units,), "b": (units,)}
        for name in ("alpha", "alpha_p", "beta", "gamma"):
            shapes[name] = (units, self.d)
        for name, shape in shapes.items():
            arr = np.array(getattr(self, name), dtype=float).reshape(shape)
            if not np.all(np.isfinite(arr)):
                raise InvalidArgumentError(f"field {name} must hold finite values")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        flags = (
            np.zeros((units, self.d), dtype=bool)
            if self.gamma_reflect is None
            else np.array(self.gamma_reflect, dtype=bool).reshape(units, self.d)
        )
        flags.flags.writeable = False
        object.__setattr__(self, "gamma_reflect", flags)

    @property
    def units(self) -> int:
        return self.n**self.d


def validate_params(params: PhiNetParams) -> List[ParamViolation]:
    """Every breach of ``|c| <= C_n``, ``|b| <= B_n``, ``|α|, |α'| <= Ξ_n``; empty means ok."""
    bounds = params.bounds
    checks = (("c", params.c, bounds.C), ("b", params.b, bounds.B),
              ("alpha", params.alpha, bounds.Xi), ("alpha_p", params.alpha_p, bounds.Xi))
    found = []
    for unit in range(params.units):
        for name, arr, limit in checks:
            for value in np.atleast_1d(arr[unit]):
                if abs(value) > limit:
                    found.append(ParamViolation(unit + 1, name, float(value), float(limit)))
    return found


def _phi_inner(params: PhiNetParams, pts: np.ndarray) -> np.ndarray:
    block = pts[:, None, :]
    sign = np.where(params.gamma_reflect, -1.0, 1.0)
    first = heaviside_array(block + params.beta[None])
    second = heaviside_array(sign[None] * block + params.gamma[None])
    total = (params.alpha[None] * first).sum(axis=2) + (params.alpha_p[None] * second).sum(axis=2)
    return total + params.b[None]


def eval_phi_net(params: PhiNetParams, x) -> Union[float, np.ndarray]:
    """Evaluate an element of ``Φ_{n,2d}``.

    :raises InvalidArgumentError: If the parameters breach their bounds
    """
    violations = validate_params(params)
    if violations:
        first = violations[0]
        raise InvalidArgumentError(
            f"{len(violations)} bound violation(s), first: unit {first.unit} field {first.field}"
        )
    pts = as_points(x, params.d)
    out = np.empty(pts.shape[0])
    for start in range(0, pts.shape[0], _CHUNK):
        hidden = params.sigma(_phi_inner(params, pts[start:start + _CHUNK]))
        out[start:start + _CHUNK] = _ordered_sum(hidden, params.c)
    return float(out[0]) if out.shape[0] == 1 else out


def _localizer_units(partition: CubicPartition, gain: float):
    lower, upper = partition.corners()
    units, d = lower.shape
    alpha = np.full((units, d), 2.0 * gain)
    b = np.full(units, 2.0 * gain * (-2 * d + 0.5))
    return alpha, b, -lower, upper


def encode_approximant(net: SparseApproximant, bounds: Optional[PhiBounds] = None) -> PhiNetParams:
    """Write a sparse approximant as an element of ``Φ_{n,2d}``.

    ``α = α' = 2K``, ``β = -(j-1)/n``, reflected ``γ = j/n``, ``b = 2K(-2d + 1/2)``.
    Without explicit bounds the smallest admissible triple is used.
    """
    p = net.partition
    alpha, b, beta, gamma = _localizer_units(p, net.K)
    if bounds is None:
        c_max = float(np.max(np.abs(net.coefficients))) if net.coefficients.size else 0.0
        bounds = PhiBounds(float(np.max(np.abs(b))), c_max, 2.0 * net.K)
    return PhiNetParams(
        n=p.n, d=p.d, c=net.coefficients, b=b, alpha=alpha, alpha_p=alpha, beta=beta,
        gamma=gamma, bounds=bounds, sigma=net.sigma,
        gamma_reflect=np.ones_like(beta, dtype=bool),
    )


def encode_localizer(net: LocalizerNet, bounds: Optional[PhiBounds] = None) -> PhiNetParams:
    """A localizer as the ``Φ_{n,2d}`` element with ``c = 1`` on its cell and 0 elsewhere."""
    p = net.partition
    c = np.zeros(p.cell_count)
    c[p.flat(net.j)] = 1.0
    approximant = SparseApproximant(p, c, p.centers(), net.K, net.sigma)
    return encode_approximant(approximant, bounds)


def project_clip(v, M: float):
    """The projection ``π_M`` onto ``[-M, M]``."""
    if not M > 0:
        raise InvalidArgumentError(f"projection bound M must be positive, got {M}")
    if np.ndim(v) == 0:
        return float(min(M, max(-M, float(v))))
    return np.clip(np.asarray(v, dtype=float), -M, M)


@dataclass(frozen=True)
class ShallowNetParams:
    """A shallow net ``Σ_j c_j σ(<w_j, x> + θ_j)`` with ``|c_j| <= Γ_n``."""

    c: np.ndarray
    w: np.ndarray
    theta: np.ndarray
    gamma_bound: float
    sigma: SigmoidSpec

    def __post_init__(self):
        c = np.array(self.c, dtype=float).reshape(-1)
        w = np.array(self.w, dtype=float).reshape(c.shape[0], -1)
        theta = np.array(self.theta, dtype=float).reshape(-1)
        if theta.shape != c.shape:
            raise InvalidArgumentError("c and theta must have one entry per unit")
        if np.any(np.abs(c) > self.gamma_bound):
            raise InvalidArgumentError(f"outer weights exceed the bound {self.gamma_bound}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "theta", theta)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def d(self) -> int:
        return self.w.shape[1]


def eval_shallow(params: ShallowNetParams, x) -> Union[float, np.ndarray]:
    pts = as_points(x, params.d)
    hidden = params.sigma(pts @ params.w.T + params.theta[None])
    out = _ordered_sum(hidden, params.c)
    return float(out[0]) if out.shape[0] == 1 else out


class PhiUnitDocument(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    c: float
    b: float
    alpha: List[float]
    alpha_p: List[float]
    beta: List[float]
    gamma: List[float]
    gamma_reflect: List[bool] = Field(default_factory=list)


class PhiBoundsDocument(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    B_n: float
    C_n: float
    Xi_n: float


class PhiNetDocument(BaseModel):
    """Flat JSON form of a ``Φ_{n,2d}`` element."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    kind: str = "phi"
    n: int
    d: int
    sigma: str
    bounds: PhiBoundsDocument
    units: List[PhiUnitDocument]


def phi_params_to_json(params: PhiNetParams, kind: str = "phi") -> str:
    units = [
        PhiUnitDocument(
            c=float(params.c[u]), b=float(params.b[u]),
            alpha=params.alpha[u].tolist(), alpha_p=params.alpha_p[u].tolist(),
            beta=params.beta[u].tolist(), gamma=params.gamma[u].tolist(),
            gamma_reflect=params.gamma_reflect[u].tolist(),
        )
        for u in range(params.units)
    ]
    doc = PhiNetDocument(
        kind=kind, n=params.n, d=params.d, sigma=params.sigma.kind.value,
        bounds=PhiBoundsDocument(B_n=params.bounds.B, C_n=params.bounds.C, Xi_n=params.bounds.Xi),
        units=units,
    )
    return doc.model_dump_json()


def phi_params_from_json(text: str) -> PhiNetParams:
    doc = PhiNetDocument.model_validate_json(text)
    if len(doc.units) != doc.n**doc.d:
        raise InvalidArgumentError(f"expected {doc.n**doc.d} units, got {len(doc.units)}")

    def stack(name: str) -> np.ndarray:
        return np.array([getattr(u, name) for u in doc.units], dtype=float)

    reflect = [u.gamma_reflect or [False] * doc.d for u in doc.units]
    return PhiNetParams(
        n=doc.n, d=doc.d, c=stack("c"), b=stack("b"), alpha=stack("alpha"),
        alpha_p=stack("alpha_p"), beta=stack("beta"), gamma=stack("gamma"),
        bounds=PhiBounds(doc.bounds.B_n, doc.bounds.C_n, doc.bounds.Xi_n),
        sigma=sigmoid(doc.sigma), gamma_reflect=np.array(reflect, dtype=bool),
    )
