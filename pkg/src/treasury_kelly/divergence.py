"""Divergences between Bernoulli laws and the two-sided sets they cut out.

The Kullback-Leibler form here follows the convention

    kl_bernoulli(q, p) = p ln(p/q) + (1-p) ln((1-p)/(1-q)),

so the candidate probability ``p`` sits inside the logarithms and the
function is minimised at ``p = q`` for a fixed centre ``q``. Every divergence
used for uncertainty sets is ``divergence(spec, q, p) = B(p, q)`` for the
family's Bregman form ``B``; for KL this reproduces ``kl_bernoulli``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .errors import DomainError, NoRoot

BOUNDARY_DELTA = 1e-15
ROOT_TOL = 1e-12


class Family(str, enum.Enum):
    KL = "kl"
    ITAKURA_SAITO = "itakura_saito"
    SQUARED_EUCLIDEAN = "squared_euclidean"
    CUSTOM = "custom"


@dataclass(frozen=True)
class DivergenceSpec:
    """Which Bregman divergence measures distance between win probabilities.

    ``per_outcome`` sums the scalar divergence over the win and lose outcomes,
    i.e. treats ``(p, 1-p)`` as a two-point distribution. It is on by default
    for Itakura-Saito, the only built-in whose scalar generator is not already
    written over both outcomes (the KL generator ``t ln t + (1-t) ln(1-t)`` is).
    """

    family: Family
    generator: Callable[[float], float] | None = field(default=None, compare=False)
    derivative: Callable[[float], float] | None = field(default=None, compare=False)
    per_outcome: bool = False
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.CUSTOM:
            if self.generator is None or self.derivative is None:
                raise DomainError("a custom divergence needs both a generator and its derivative")
        elif self.generator is not None or self.derivative is not None:
            raise DomainError("generators are only accepted for the custom family")

    @classmethod
    def kl(cls) -> "DivergenceSpec":
        return cls(Family.KL, name="kl")

    @classmethod
    def itakura_saito(cls, per_outcome: bool = True) -> "DivergenceSpec":
        return cls(Family.ITAKURA_SAITO, per_outcome=per_outcome,
                   name="is" if per_outcome else "is-scalar")

    @classmethod
    def squared_euclidean(cls) -> "DivergenceSpec":
        return cls(Family.SQUARED_EUCLIDEAN, name="se")

    @classmethod
    def custom(cls, generator, derivative, per_outcome: bool = False, name: str = "custom") -> "DivergenceSpec":
        return cls(Family.CUSTOM, generator, derivative, per_outcome, name)

    @classmethod
    def from_name(cls, name: str) -> "DivergenceSpec":
        key = name.strip().lower().replace("-", "_")
        table = {
            "kl": cls.kl,
            "is": cls.itakura_saito,
            "itakura_saito": cls.itakura_saito,
            "is_scalar": lambda: cls.itakura_saito(per_outcome=False),
            "se": cls.squared_euclidean,
            "squared_euclidean": cls.squared_euclidean,
        }
        try:
            return table[key]()
        except KeyError:
            raise DomainError(f"unknown divergence {name!r}; expected one of kl, is, is-scalar, se") from None

    @property
    def kernel_code(self) -> int | None:
        if self.family is Family.KL:
            return _kernels.KL
        if self.family is Family.ITAKURA_SAITO:
            return _kernels.ITAKURA_SAITO if self.per_outcome else _kernels.ITAKURA_SAITO_SCALAR
        if self.family is Family.SQUARED_EUCLIDEAN:
            return _kernels.SQUARED_EUCLIDEAN
        return None


def _check_prob(x: float, name: str) -> float:
    x = float(x)
    if not (math.isfinite(x) and 0.0 < x < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {x!r}")
    return x


def kl_bernoulli(q: float, p: float) -> float:
    q = _check_prob(q, "q")
    p = _check_prob(p, "p")
    return p * math.log(p / q) + (1.0 - p) * math.log((1.0 - p) / (1.0 - q))


# ---------------------------------------------------------------------------
# Bregman divergences
# ---------------------------------------------------------------------------


def _bernoulli_negentropy(t: float) -> float:
    return t * math.log(t) + (1.0 - t) * math.log1p(-t)


def _bernoulli_negentropy_prime(t: float) -> float:
    return math.log(t) - math.log1p(-t)


GENERATORS = {
    Family.KL: (_bernoulli_negentropy, _bernoulli_negentropy_prime),
    Family.ITAKURA_SAITO: (lambda t: -math.log(t), lambda t: -1.0 / t),
    Family.SQUARED_EUCLIDEAN: (lambda t: t * t, lambda t: 2.0 * t),
}


def generator_of(spec: DivergenceSpec):
    """(phi, phi') for ``spec``."""
    if spec.family is Family.CUSTOM:
        return spec.generator, spec.derivative
    return GENERATORS[spec.family]


def bregman(spec: DivergenceSpec, x: float, y: float) -> float:
    """``phi(x) - phi(y) - phi'(y) (x - y)`` for the family's scalar generator.

    Built-in families use algebraically reduced closed forms.
    """
    x = float(x)
    y = float(y)
    fam = spec.family
    if fam is Family.KL:
        _check_prob(x, "x")
        _check_prob(y, "y")
        return x * math.log(x / y) + (1.0 - x) * math.log((1.0 - x) / (1.0 - y))
    if fam is Family.ITAKURA_SAITO:
        if not (x > 0.0 and y > 0.0 and math.isfinite(x) and math.isfinite(y)):
            raise DomainError(f"Itakura-Saito needs positive arguments, got ({x!r}, {y!r})")
        r = x / y
        return r - math.log(r) - 1.0
    if fam is Family.SQUARED_EUCLIDEAN:
        return (x - y) ** 2
    phi, dphi = spec.generator, spec.derivative
    try:
        return phi(x) - phi(y) - dphi(y) * (x - y)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"generator undefined at ({x!r}, {y!r}): {exc}") from exc


def divergence(spec: DivergenceSpec, q: float, p: float) -> float:
    """Divergence of candidate win probability ``p`` from the centre ``q``."""
    q = _check_prob(q, "q")
    p = _check_prob(p, "p")
    code = spec.kernel_code
    if code is not None:
        return _kernels.divergence_scalar(code, q, p)
    value = bregman(spec, p, q)
    if spec.per_outcome:
        value += bregman(spec, 1.0 - p, 1.0 - q)
    return value


# ---------------------------------------------------------------------------
# series of kl_bernoulli about p = q
# ---------------------------------------------------------------------------

SERIES_VARIANTS = ("as_printed", "derivative_based")


def kl_series_coefficients(q: float, variant: str = "derivative_based", order: int = 5) -> list[float]:
    """Coefficients of eps**2 .. eps**order.

    ``derivative_based`` are the Taylor coefficients of ``kl_bernoulli(q, q+eps)``:
    ((-1)^n / q^(n-1) + 1 / (1-q)^(n-1)) / (n (n-1)).
    ``as_printed`` reproduces a published closed form whose cubic and higher
    terms differ from the Taylor coefficients (see :func:`series_diagnostic`).
    """
    q = _check_prob(q, "q")
    if order not in (2, 3, 4, 5):
        raise DomainError(f"order must be in 2..5, got {order!r}")
    if variant not in SERIES_VARIANTS:
        raise DomainError(f"variant must be one of {SERIES_VARIANTS}, got {variant!r}")
    r = 1.0 - q
    if variant == "derivative_based":
        coeffs = [((-1) ** n / q ** (n - 1) + 1.0 / r ** (n - 1)) / (n * (n - 1)) for n in range(2, order + 1)]
    else:
        printed = [
            1.0 / (2.0 * r * q),
            -(1.0 / 6.0) * (r**2 + q**2) / (r**2 * q**2),
            (1.0 / 12.0) * (r**3 - q**3) / (r**3 * q**3),
            -(1.0 / 20.0) * (r**4 + q**4) / (r**4 * q**4),
        ]
        coeffs = printed[: order - 1]
    return coeffs


def kl_series(q: float, epsilon: float, variant: str = "derivative_based", order: int = 3) -> float:
    q = _check_prob(q, "q")
    _check_prob(q + epsilon, "q + epsilon")
    coeffs = kl_series_coefficients(q, variant, order)
    return sum(c * epsilon ** (n + 2) for n, c in enumerate(coeffs))


@dataclass(frozen=True)
class SeriesDiagnostic:
    q: float
    epsilon: float
    exact: float
    quadratic: float
    cubic_derivative_based: float
    cubic_as_printed: float
    series_derivative_based: float
    series_as_printed: float

    @property
    def required_cubic(self) -> float:
        """Correction the exact value needs beyond the quadratic term."""
        return self.exact - self.quadratic

    @property
    def error_derivative_based(self) -> float:
        return self.exact - self.series_derivative_based

    @property
    def error_as_printed(self) -> float:
        return self.exact - self.series_as_printed

    def rows(self) -> list[tuple[str, float]]:
        return [
            ("exact", self.exact),
            ("quadratic term", self.quadratic),
            ("required correction", self.required_cubic),
            ("cubic term (derivative-based)", self.cubic_derivative_based),
            ("cubic term (as printed)", self.cubic_as_printed),
            ("series order 3 (derivative-based)", self.series_derivative_based),
            ("series order 3 (as printed)", self.series_as_printed),
            ("error (derivative-based)", self.error_derivative_based),
            ("error (as printed)", self.error_as_printed),
        ]


def series_diagnostic(q: float, epsilon: float) -> SeriesDiagnostic:
    """Compare both cubic series against the exact divergence at ``q + epsilon``."""
    d2, d3 = kl_series_coefficients(q, "derivative_based", 3)
    _, p3 = kl_series_coefficients(q, "as_printed", 3)
    quad = d2 * epsilon**2
    return SeriesDiagnostic(
        q=q,
        epsilon=epsilon,
        exact=kl_bernoulli(q, q + epsilon),
        quadratic=quad,
        cubic_derivative_based=d3 * epsilon**3,
        cubic_as_printed=p3 * epsilon**3,
        series_derivative_based=quad + d3 * epsilon**3,
        series_as_printed=quad + p3 * epsilon**3,
    )


def series_roots(q: float, alpha: float, variant: str = "derivative_based", order: int = 2) -> tuple[float, float]:
    """Offsets (eps_minus, eps_plus) solving the truncated series = alpha.

    Order 2 gives the symmetric pair +-sqrt(2 q (1-q) alpha); higher orders pick
    the real roots closest to that pair. Used only as a diagnostic.
    """
    coeffs = kl_series_coefficients(q, variant, order)
    guess = math.sqrt(2.0 * q * (1.0 - q) * alpha)
    if order == 2:
        return -guess, guess
    poly = [0.0] * (order + 1)
    for n, c in enumerate(coeffs):
        poly[n + 2] = c
    poly[0] = -alpha
    roots = np.roots(poly[::-1])
    real = roots[np.abs(roots.imag) < 1e-12].real
    if real.size == 0:
        raise DomainError("truncated series has no real root")
    minus = real[np.argmin(np.abs(real + guess))]
    plus = real[np.argmin(np.abs(real - guess))]
    return float(minus), float(plus)


# ---------------------------------------------------------------------------
# uncertainty sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UncertaintySet:
    """Probabilities at divergence exactly ``budget_alpha`` either side of ``center_q``."""

    center_q: float
    budget_alpha: float
    p_minus: float
    p_plus: float
    spec: DivergenceSpec = field(default_factory=DivergenceSpec.kl)

    def __post_init__(self):
        if not (self.p_minus <= self.center_q <= self.p_plus):
            raise DomainError(
                f"need p_minus <= q <= p_plus, got {self.p_minus!r}, {self.center_q!r}, {self.p_plus!r}"
            )

    @property
    def residuals(self) -> tuple[float, float]:
        a = self.budget_alpha
        return (
            divergence(self.spec, self.center_q, self.p_minus) - a,
            divergence(self.spec, self.center_q, self.p_plus) - a,
        )


def attainable(spec: DivergenceSpec, q: float, delta: float = BOUNDARY_DELTA) -> tuple[float, float]:
    """Largest divergence reachable inside the bracket on the (lower, upper) side."""
    return divergence(spec, q, delta), divergence(spec, q, 1.0 - delta)


def _bisect_callable(fn, lo, hi, lower):
    for _ in range(_kernels.MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        r = fn(mid)
        if r == 0.0:
            return mid
        if (r > 0.0) == lower:
            lo = mid
        else:
            hi = mid
    return lo if abs(fn(lo)) <= abs(fn(hi)) else hi


def solve_uncertainty_set(spec: DivergenceSpec, q: float, alpha: float, delta: float = BOUNDARY_DELTA,
                          tol: float = ROOT_TOL) -> UncertaintySet:
    """Bracketed bisection for both roots of ``divergence(spec, q, p) = alpha``."""
    q = _check_prob(q, "q")
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha >= 0.0):
        raise DomainError(f"alpha must be finite and >= 0, got {alpha!r}")
    if alpha == 0.0:
        return UncertaintySet(q, 0.0, q, q, spec)
    lo_max, hi_max = attainable(spec, q, delta)
    if not alpha < lo_max:
        raise NoRoot("lower", alpha, lo_max)
    if not alpha < hi_max:
        raise NoRoot("upper", alpha, hi_max)

    code = spec.kernel_code
    if code is not None:
        lo, hi = _kernels.uncertainty_roots(code, q, alpha, delta)
        p_minus, p_plus = float(lo[0]), float(hi[0])
    else:
        fn = lambda p: divergence(spec, q, p) - alpha  # noqa: E731
        p_minus = _bisect_callable(fn, delta, q, True)
        p_plus = _bisect_callable(fn, q, 1.0 - delta, False)

    out = UncertaintySet(q, alpha, p_minus, p_plus, spec)
    worst = max(abs(r) for r in out.residuals)
    if worst > tol:
        raise DomainError(
            f"root residual {worst:.3e} exceeds tolerance {tol:.1e}; a root this close to 0 or 1 "
            "is not resolvable in double precision"
        )
    return out


def solve_batch(spec: DivergenceSpec, q, alpha, delta: float = BOUNDARY_DELTA, backend: str | None = None):
    """Vectorised roots for arrays of (q, alpha); built-in families only.

    No attainability check is made; callers must keep alpha inside the range
    given by :func:`attainable`.
    """
    code = spec.kernel_code
    if code is None:
        raise DomainError("batch solving is available for built-in families only")
    return _kernels.uncertainty_roots(code, q, alpha, delta, backend=backend)
