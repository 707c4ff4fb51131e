"""Log-growth of the double-or-nothing bet and its expansion around the optimum.

All values are in nats. Pass ``unit="bits"`` to divide by ln 2 on the way out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _kernels
from .errors import DomainError

LN2 = math.log(2.0)
UNITS = ("nats", "bits")


@dataclass(frozen=True)
class BinaryGame:
    """Double-or-nothing wager won with probability ``win_prob``."""

    win_prob: float

    def __post_init__(self):
        p = self.win_prob
        if not (isinstance(p, (int, float)) and math.isfinite(p) and 0.0 < p < 1.0):
            raise DomainError(f"win probability must lie in (0, 1), got {p!r}")


def as_game(game: BinaryGame | float) -> BinaryGame:
    return game if isinstance(game, BinaryGame) else BinaryGame(float(game))


def _convert(value: float, unit: str) -> float:
    if unit == "nats":
        return value
    if unit == "bits":
        return value / LN2
    raise DomainError(f"unit must be one of {UNITS}, got {unit!r}")


def _check_fraction(f: float) -> float:
    f = float(f)
    if not (math.isfinite(f) and -1.0 < f < 1.0):
        raise DomainError(f"fraction must lie in (-1, 1), got {f!r}")
    return f


def growth_rate(game: BinaryGame | float, f: float, unit: str = "nats") -> float:
    """Expected log-growth ``p ln(1+f) + (1-p) ln(1-f)`` per round."""
    p = as_game(game).win_prob
    f = _check_fraction(f)
    if f == 0.0:
        return 0.0
    return _convert(p * math.log1p(f) + (1.0 - p) * math.log1p(-f), unit)


def optimal_fraction(game: BinaryGame | float) -> float:
    return 2.0 * as_game(game).win_prob - 1.0


def optimal_growth(game: BinaryGame | float, unit: str = "nats") -> float:
    """Growth at the optimum: ln 2 + p ln p + (1-p) ln(1-p).

    In bits this is 1 minus the binary entropy of p.
    """
    p = as_game(game).win_prob
    return _convert(LN2 + p * math.log(p) + (1.0 - p) * math.log1p(-p), unit)


def expansion_coefficients(game: BinaryGame | float) -> tuple[float, float, float]:
    """(constant, quadratic, cubic) coefficients of growth in the offset from 2p-1."""
    p = as_game(game).win_prob
    pq = p * (1.0 - p)
    return (
        optimal_growth(p),
        -1.0 / (8.0 * pq),
        -(2.0 * p - 1.0) / (24.0 * pq * pq),
    )


def growth_expansion(game: BinaryGame | float, epsilon: float, order: int = 3, unit: str = "nats") -> float:
    """Truncated series of the growth rate at ``f = 2p - 1 + epsilon``."""
    if order not in (2, 3):
        raise DomainError(f"order must be 2 or 3, got {order!r}")
    game = as_game(game)
    _check_fraction(optimal_fraction(game) + epsilon)
    c0, c2, c3 = expansion_coefficients(game)
    value = c0 + c2 * epsilon**2
    if order == 3:
        value += c3 * epsilon**3
    return _convert(value, unit)


def grid_argmax(game: BinaryGame | float, lo: float = -0.999, hi: float = 0.999, step: float = 1e-5,
                backend: str | None = None) -> float:
    """Brute-force maximiser of :func:`growth_rate` on an even grid."""
    p = as_game(game).win_prob
    f, _ = _kernels.growth_grid_argmax(p, lo, hi, step, backend=backend)
    return f
