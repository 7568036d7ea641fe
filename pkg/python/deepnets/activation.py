"""Sigmoidal activations, the heaviside gate and their threshold constants."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from deepnets.exceptions import InvalidArgumentError

__all__ = [
    "SigmoidKind",
    "SigmoidSpec",
    "sigmoid",
    "eval_sigmoid",
    "heaviside",
    "heaviside_array",
    "threshold_for",
    "level_for_learning",
    "lipschitz_constant",
]

logger = logging.getLogger(__name__)

_MAX_TIGHTEN_STEPS = 2000


class SigmoidKind(str, enum.Enum):
    """Activation family, named as in config files."""

    LOGISTIC = "logistic"
    TANH_HALF = "tanh"
    ARCTAN = "arctan"
    GOMPERTZ = "gompertz"


_LIPSCHITZ = {
    SigmoidKind.LOGISTIC: 0.25,
    SigmoidKind.TANH_HALF: 0.5,
    SigmoidKind.ARCTAN: 1.0 / math.pi,
    SigmoidKind.GOMPERTZ: math.exp(-1.0),
}


@dataclass(frozen=True)
class SigmoidSpec:
    """One member of the sigmoid families with its sharp Lipschitz constant.

    :param SigmoidKind kind: The family
    :param float lipschitz: ``C_σ``, the supremum of the derivative
    """

    kind: SigmoidKind
    lipschitz: float

    def __call__(self, t):
        """Vectorized evaluation; no finiteness check."""
        t = np.asarray(t, dtype=float)
        if self.kind is SigmoidKind.LOGISTIC:
            return special.expit(t)
        if self.kind is SigmoidKind.TANH_HALF:
            return 0.5 * (np.tanh(t) + 1.0)
        if self.kind is SigmoidKind.ARCTAN:
            return np.arctan(t) / np.pi + 0.5
        with np.errstate(over="ignore"):
            return np.exp(-np.exp(-t))

    def complement(self, t):
        """``1 - σ(t)`` without cancellation for large ``t``."""
        t = np.asarray(t, dtype=float)
        if self.kind is SigmoidKind.LOGISTIC:
            return special.expit(-t)
        if self.kind is SigmoidKind.TANH_HALF:
            return special.expit(-2.0 * t)
        if self.kind is SigmoidKind.ARCTAN:
            positive = np.where(t > 0, t, 1.0)
            return np.where(t > 0, np.arctan(1.0 / positive), 0.5 * np.pi - np.arctan(t)) / np.pi
        with np.errstate(over="ignore"):
            return -np.expm1(-np.exp(-t))

    def lower_tail(self, t):
        """``σ(-t)``; the symmetric kinds reuse :meth:`complement`."""
        if self.kind is SigmoidKind.GOMPERTZ:
            return self(-np.asarray(t, dtype=float))
        return self.complement(t)


def sigmoid(kind) -> SigmoidSpec:
    """Look up a sigmoid by kind or config name (``"logistic"``, ``"tanh"``, ``"arctan"``, ``"gompertz"``)."""
    try:
        k = SigmoidKind(kind)
    except ValueError:
        raise InvalidArgumentError(f"unknown sigmoid kind {kind!r}") from None
    return SigmoidSpec(k, _LIPSCHITZ[k])


def _finite(t) -> float:
    value = float(t)
    if not math.isfinite(value):
        raise InvalidArgumentError(f"argument must be finite, got {t!r}")
    return value


def eval_sigmoid(s: SigmoidSpec, t: float) -> float:
    """Evaluate ``σ(t)`` for a finite scalar ``t``."""
    return float(s(_finite(t)))


def heaviside(t: float) -> int:
    """The gate ``σ0``: 1 when ``t >= 0`` and 0 otherwise."""
    return 1 if _finite(t) >= 0.0 else 0


def heaviside_array(t) -> np.ndarray:
    return (np.asarray(t) >= 0.0).astype(float)


def lipschitz_constant(s: SigmoidSpec) -> float:
    return s.lipschitz


def _closed_form(s: SigmoidSpec, eps: float) -> float:
    if s.kind is SigmoidKind.LOGISTIC:
        return math.log1p(-eps) - math.log(eps)
    if s.kind is SigmoidKind.TANH_HALF:
        return 0.5 * (math.log1p(-eps) - math.log(eps))
    if s.kind is SigmoidKind.ARCTAN:
        return 1.0 / math.tan(math.pi * eps)
    return max(-math.log(-math.log1p(-eps)), math.log(-math.log(eps)))


def _tails_hold(s: SigmoidSpec, eps: float, k: float) -> bool:
    # 1 - eps rounds to 1 below about 1.1e-16; the complement carries the upper tail there
    upper = float(s.complement(k)) < eps and (1.0 - eps == 1.0 or float(s(k)) > 1.0 - eps)
    return upper and float(s.lower_tail(k)) < eps and float(s(-k)) < eps


def threshold_for(s: SigmoidSpec, eps: float) -> float:
    """The gain ``K_ε``: ``σ(t) > 1-ε`` for ``t >= K`` and ``σ(t) < ε`` for ``t <= -K``.

    Closed-form inversion for logistic, tanh and arctan; bisection to ``1e-12`` for
    Gompertz, whose two tails are not symmetric. The value is then raised by
    floating-point steps until both tails hold strictly in floating point.

    :raises InvalidArgumentError: Unless ``0 < ε < 1/2``
    """
    eps = _finite(eps)
    if not 0.0 < eps < 0.5:
        raise InvalidArgumentError(f"threshold needs 0 < eps < 1/2, got {eps}")
    if s.kind is SigmoidKind.GOMPERTZ:

        def gap(t: float) -> float:
            return max(float(s.lower_tail(t)), float(s.complement(t))) - eps

        hi = _closed_form(s, eps) + 1.0
        k = float(optimize.bisect(gap, 0.0, hi, xtol=1e-12))
    else:
        k = _closed_form(s, eps)

    step = max(np.spacing(k), np.finfo(float).tiny)
    for _ in range(_MAX_TIGHTEN_STEPS):
        if _tails_hold(s, eps, k):
            return k
        k += step
        step *= 2.0
    raise InvalidArgumentError(f"no finite threshold found for {s.kind.value} at eps={eps}")


def level_for_learning(s: SigmoidSpec, n: int, N: int, s_count: int, r: float, d: int) -> float:
    """The level ``L = K_ε`` with ``ε = n^{-r-d} (s/N^d)^{1/2}``.

    For the logistic kind the value is cross-checked against ``(r+d) log(n N^d / s)``
    and a warning is logged when the two differ by more than a factor of 2.
    """
    if n < 1 or N < 1 or s_count < 1 or d < 1:
        raise InvalidArgumentError("n, N, s and d must be positive")
    if s_count > N**d:
        raise InvalidArgumentError(f"sparsity s={s_count} exceeds N^d={N**d}")
    if r <= 0:
        raise InvalidArgumentError(f"smoothness r must be positive, got {r}")
    eps = n ** (-r - d) * math.sqrt(s_count / N**d)
    level = threshold_for(s, eps)
    if s.kind is SigmoidKind.LOGISTIC:
        reference = (r + d) * math.log(n * N**d / s_count)
        if not 0.5 * reference <= level <= 2.0 * reference:
            logger.warning("level %.6g is off the (r+d)log(nN^d/s) scale %.6g", level, reference)
    return level
