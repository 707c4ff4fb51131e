"""Kelly fractions that account for an uncertain win probability.

All four rules are long-only: a negative raw fraction is clamped to zero and
the clamp is reported in :class:`RuleResult`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .divergence import UncertaintySet
from .errors import DomainError
from .kelly import growth_rate

GOLDEN_TOL = 1e-10
F_MAX = 1.0 - 1e-9


class Mode(str, enum.Enum):
    WORST_CASE = "worst"
    EQUAL_WEIGHTED = "equal"
    BEST_CASE = "best"
    HEURISTIC = "heuristic"


@dataclass(frozen=True)
class RobustPolicy:
    mode: Mode
    lam: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not (math.isfinite(self.lam) and self.lam >= 0.0):
            raise DomainError(f"risk aversion must be finite and >= 0, got {self.lam!r}")


@dataclass(frozen=True)
class RuleResult:
    rule: str
    fraction: float
    raw: float

    @property
    def clamped(self) -> bool:
        return self.raw < 0.0


def _clamp(x: float) -> float:
    return max(0.0, x)


def worst_case_fraction(uset: UncertaintySet) -> float:
    return _clamp(2.0 * uset.p_minus - 1.0)


def best_case_fraction(uset: UncertaintySet) -> float:
    return _clamp(2.0 * uset.p_plus - 1.0)


def equal_weighted_fraction(uset: UncertaintySet) -> float:
    """Maximiser of the equal mixture of growth under ``p_minus`` and ``p_plus``."""
    return _clamp(uset.p_minus + uset.p_plus - 1.0)


def heuristic_fraction(q: float, alpha: float, lam: float) -> float:
    """``max(0, 2q-1) * exp(-lam * alpha)``."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    if not (math.isfinite(alpha) and alpha >= 0.0):
        raise DomainError(f"alpha must be finite and >= 0, got {alpha!r}")
    if not (math.isfinite(lam) and lam >= 0.0):
        raise DomainError(f"risk aversion must be finite and >= 0, got {lam!r}")
    return _clamp(2.0 * q - 1.0) * math.exp(-lam * alpha)


def robust_fraction(uset: UncertaintySet, policy: RobustPolicy) -> float:
    if policy.mode is Mode.WORST_CASE:
        return worst_case_fraction(uset)
    if policy.mode is Mode.BEST_CASE:
        return best_case_fraction(uset)
    if policy.mode is Mode.EQUAL_WEIGHTED:
        return equal_weighted_fraction(uset)
    return heuristic_fraction(uset.center_q, uset.budget_alpha, policy.lam)


def robust_table(uset: UncertaintySet, lam: float = 1.0) -> list[RuleResult]:
    """All four rules side by side, with the unclamped values kept."""
    q, a = uset.center_q, uset.budget_alpha
    if not (math.isfinite(lam) and lam >= 0.0):
        raise DomainError(f"risk aversion must be finite and >= 0, got {lam!r}")
    raws = [
        ("worst", 2.0 * uset.p_minus - 1.0),
        ("equal", uset.p_minus + uset.p_plus - 1.0),
        ("best", 2.0 * uset.p_plus - 1.0),
        ("heuristic", (2.0 * q - 1.0) * math.exp(-lam * a)),
    ]
    return [RuleResult(name, _clamp(raw), raw) for name, raw in raws]


def _check_mixture(probs: Sequence[float], weights: Sequence[float] | None):
    probs = np.asarray(probs, dtype=float).ravel()
    if probs.size == 0:
        raise DomainError("mixture needs at least one probability")
    if not np.all((probs > 0.0) & (probs < 1.0)):
        raise DomainError("mixture probabilities must lie in (0, 1)")
    if weights is None:
        weights = np.full(probs.size, 1.0 / probs.size)
    weights = np.asarray(weights, dtype=float).ravel()
    if weights.shape != probs.shape:
        raise DomainError("weights and probabilities differ in length")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0.0) or abs(weights.sum() - 1.0) > 1e-12:
        raise DomainError("weights must be nonnegative and sum to 1")
    return probs, weights


def mixture_growth(probs: Sequence[float], weights: Sequence[float] | None, f: float) -> float:
    probs, weights = _check_mixture(probs, weights)
    return float(sum(w * growth_rate(float(p), f) for p, w in zip(probs, weights)))


def mixture_argmax(probs: Sequence[float], weights: Sequence[float] | None = None,
                   backend: str | None = None) -> float:
    """Golden-section maximiser of ``sum_i w_i growth_rate(p_i, f)`` over [0, 1-1e-9]."""
    probs, weights = _check_mixture(probs, weights)
    f = _kernels.mixture_golden(probs[None, :], weights[None, :], 0.0, F_MAX, GOLDEN_TOL, backend=backend)[0]
    # a maximiser pinned to the zero boundary is reported as exactly zero
    return 0.0 if f < GOLDEN_TOL else float(f)


def mixture_argmax_batch(probs, weights, backend: str | None = None) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    weights = np.asarray(weights, dtype=float)
    f = _kernels.mixture_golden(probs, weights, 0.0, F_MAX, GOLDEN_TOL, backend=backend)
    return np.where(f < GOLDEN_TOL, 0.0, f)


def mixture_grid_argmax(probs: Sequence[float], weights: Sequence[float] | None = None, step: float = 1e-5,
                        backend: str | None = None) -> float:
    """Grid maximiser over [0, 1-1e-9]; a coarse, independent oracle."""
    probs, weights = _check_mixture(probs, weights)
    f, _ = _kernels.mixture_grid_argmax(probs, weights, 0.0, F_MAX, step, backend=backend)
    return f
