"""Numeric inner loops, each with a compiled scalar-loop and a numpy form.

Divergence family codes used by the root kernels:

    0  KL between Bernoulli laws, p inside the logarithms
    1  Itakura-Saito summed over the win and lose outcomes
    2  squared Euclidean on the win probability
    3  Itakura-Saito on the win probability alone
"""

from __future__ import annotations

import math

import numpy as np

from ._backend import BACKEND, HAVE_NUMBA, njit

KL, ITAKURA_SAITO, SQUARED_EUCLIDEAN, ITAKURA_SAITO_SCALAR = 0, 1, 2, 3
BUILTIN_CODES = (KL, ITAKURA_SAITO, SQUARED_EUCLIDEAN, ITAKURA_SAITO_SCALAR)

MAX_BISECTIONS = 2200


# ---------------------------------------------------------------------------
# scalar forms (compiled when numba is present)
# ---------------------------------------------------------------------------


def _div_scalar(code, q, p):
    if code == 0:
        return p * math.log(p / q) + (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    if code == 1:
        r = p / q
        s = (1.0 - p) / (1.0 - q)
        return (r - math.log(r) - 1.0) + (s - math.log(s) - 1.0)
    if code == 2:
        d = p - q
        return d * d
    r = p / q
    return r - math.log(r) - 1.0


_div_scalar_c = njit(_div_scalar)


def _bisect_one(code, q, alpha, lo, hi, lower):
    """Bisection on D(q, .) - alpha, run until the bracket is float-adjacent."""
    if alpha == 0.0:
        return q
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        r = _div_scalar_c(code, q, mid) - alpha
        if r == 0.0:
            return mid
        if lower:
            # divergence falls towards q on the lower side
            if r > 0.0:
                lo = mid
            else:
                hi = mid
        else:
            if r > 0.0:
                hi = mid
            else:
                lo = mid
    r_lo = abs(_div_scalar_c(code, q, lo) - alpha)
    r_hi = abs(_div_scalar_c(code, q, hi) - alpha)
    return lo if r_lo <= r_hi else hi


_bisect_one_c = njit(_bisect_one)


def _roots_loop(code, q, alpha, delta, out_lo, out_hi):
    for i in range(q.shape[0]):
        out_lo[i] = _bisect_one_c(code, q[i], alpha[i], delta, q[i], True)
        out_hi[i] = _bisect_one_c(code, q[i], alpha[i], q[i], 1.0 - delta, False)


_roots_loop_c = njit(_roots_loop)


def _growth_grid_loop(p, lo, step, n):
    best_f = lo
    best_g = -np.inf
    for i in range(n):
        f = lo + i * step
        g = p * math.log1p(f) + (1.0 - p) * math.log1p(-f)
        if g > best_g:
            best_g = g
            best_f = f
    return best_f, best_g


_growth_grid_loop_c = njit(_growth_grid_loop)


def _mixture_grid_loop(probs, weights, lo, step, n):
    best_f = lo
    best_g = -np.inf
    for i in range(n):
        f = lo + i * step
        a = math.log1p(f)
        b = math.log1p(-f)
        g = 0.0
        for k in range(probs.shape[0]):
            g += weights[k] * (probs[k] * a + (1.0 - probs[k]) * b)
        if g > best_g:
            best_g = g
            best_f = f
    return best_f, best_g


_mixture_grid_loop_c = njit(_mixture_grid_loop)


def _mixture_diff(probs, weights, f1, f2):
    # mixture growth at f1 minus at f2, without cancellation near the peak
    up = math.log1p((f1 - f2) / (1.0 + f2))
    down = math.log1p(-(f1 - f2) / (1.0 - f2))
    s = 0.0
    for k in range(probs.shape[0]):
        s += weights[k] * (probs[k] * up + (1.0 - probs[k]) * down)
    return s


_mixture_diff_c = njit(_mixture_diff)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_one(probs, weights, lo, hi, tol):
    a = lo
    b = hi
    while b - a > tol:
        c = b - _INV_PHI * (b - a)
        d = a + _INV_PHI * (b - a)
        if c <= a or d >= b or c >= d:
            break
        if _mixture_diff_c(probs, weights, c, d) > 0.0:
            b = d
        else:
            a = c
    return 0.5 * (a + b)


_golden_one_c = njit(_golden_one)


def _golden_loop(probs, weights, lo, hi, tol, out):
    for i in range(probs.shape[0]):
        out[i] = _golden_one_c(probs[i], weights[i], lo, hi, tol)


_golden_loop_c = njit(_golden_loop)


# ---------------------------------------------------------------------------
# numpy forms
# ---------------------------------------------------------------------------


def divergence_np(code: int, q, p):
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if code == KL:
        return p * np.log(p / q) + (1.0 - p) * np.log((1.0 - p) / (1.0 - q))
    if code == ITAKURA_SAITO:
        r = p / q
        s = (1.0 - p) / (1.0 - q)
        return (r - np.log(r) - 1.0) + (s - np.log(s) - 1.0)
    if code == SQUARED_EUCLIDEAN:
        return (p - q) ** 2
    if code == ITAKURA_SAITO_SCALAR:
        r = p / q
        return r - np.log(r) - 1.0
    raise ValueError(f"unknown divergence code {code}")


def _bisect_np(code, q, alpha, lo, hi, lower):
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        active = (mid > lo) & (mid < hi)
        if not active.any():
            break
        r = divergence_np(code, q, mid) - alpha
        go_right = (r > 0.0) if lower else (r <= 0.0)
        exact = r == 0.0
        lo = np.where(active & (go_right | exact), mid, lo)
        hi = np.where(active & (~go_right | exact), mid, hi)
    r_lo = np.abs(divergence_np(code, q, lo) - alpha)
    r_hi = np.abs(divergence_np(code, q, hi) - alpha)
    out = np.where(r_lo <= r_hi, lo, hi)
    return np.where(alpha == 0.0, q, out)


def _roots_np(code, q, alpha, delta):
    lo_root = _bisect_np(code, q, alpha, np.full_like(q, delta), q, True)
    hi_root = _bisect_np(code, q, alpha, q, np.full_like(q, 1.0 - delta), False)
    return lo_root, hi_root


def _golden_np(probs, weights, lo, hi, tol):
    m = probs.shape[0]
    a = np.full(m, lo)
    b = np.full(m, hi)
    while True:
        active = (b - a) > tol
        if not active.any():
            break
        c = b - _INV_PHI * (b - a)
        d = a + _INV_PHI * (b - a)
        active &= (c > a) & (d < b) & (c < d)
        if not active.any():
            break
        up = np.log1p((c - d) / (1.0 + d))
        down = np.log1p(-(c - d) / (1.0 - d))
        diff = (weights * (probs * up[:, None] + (1.0 - probs) * down[:, None])).sum(axis=1)
        left_better = diff > 0.0
        b = np.where(active & left_better, d, b)
        a = np.where(active & ~left_better, c, a)
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def _resolve(backend: str | None) -> str:
    backend = backend or BACKEND
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is unavailable")
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if HAVE_NUMBA else ("numpy",)


def divergence_scalar(code: int, q: float, p: float) -> float:
    if code not in BUILTIN_CODES:
        raise ValueError(f"unknown divergence code {code}")
    return float(_div_scalar(code, float(q), float(p)))


def uncertainty_roots(code: int, q, alpha, delta: float = 1e-15, backend: str | None = None):
    """Lower and upper roots of D(q, p) = alpha for arrays of (q, alpha).

    Callers are responsible for checking that alpha is attainable on both sides.
    """
    q = np.ascontiguousarray(q, dtype=float)
    alpha = np.ascontiguousarray(alpha, dtype=float)
    q, alpha = np.broadcast_arrays(q, alpha)
    q = np.ascontiguousarray(q.ravel())
    alpha = np.ascontiguousarray(alpha.ravel())
    if _resolve(backend) == "numba":
        lo = np.empty_like(q)
        hi = np.empty_like(q)
        _roots_loop_c(code, q, alpha, delta, lo, hi)
        return lo, hi
    return _roots_np(code, q, alpha, delta)


def growth_grid_argmax(p: float, lo: float, hi: float, step: float, backend: str | None = None):
    """Brute-force maximiser of the binary growth rate on an even grid."""
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    if _resolve(backend) == "numba":
        f, g = _growth_grid_loop_c(float(p), float(lo), float(step), n)
        return float(f), float(g)
    f = lo + np.arange(n) * step
    g = p * np.log1p(f) + (1.0 - p) * np.log1p(-f)
    i = int(np.argmax(g))
    return float(f[i]), float(g[i])


def mixture_grid_argmax(probs, weights, lo: float, hi: float, step: float, backend: str | None = None):
    """Brute-force maximiser of a weighted sum of binary growth rates."""
    probs = np.ascontiguousarray(probs, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    if _resolve(backend) == "numba":
        f, g = _mixture_grid_loop_c(probs, weights, float(lo), float(step), n)
        return float(f), float(g)
    f = lo + np.arange(n) * step
    a = np.log1p(f)
    b = np.log1p(-f)
    g = np.zeros(n)
    for pk, wk in zip(probs, weights):
        g += wk * (pk * a + (1.0 - pk) * b)
    i = int(np.argmax(g))
    return float(f[i]), float(g[i])


def mixture_golden(probs, weights, lo: float, hi: float, tol: float, backend: str | None = None):
    """Golden-section maximisers for a batch of mixtures.

    ``probs`` and ``weights`` have shape (m, k); one maximiser per row.
    """
    probs = np.ascontiguousarray(np.atleast_2d(probs), dtype=float)
    weights = np.ascontiguousarray(np.atleast_2d(weights), dtype=float)
    if _resolve(backend) == "numba":
        out = np.empty(probs.shape[0])
        _golden_loop_c(probs, weights, float(lo), float(hi), float(tol), out)
        return out
    return _golden_np(probs, weights, float(lo), float(hi), float(tol))
