"""Special functions used by the closed-form expressions.

Generalized Laguerre and Hermite polynomials are evaluated by their
three-term recurrences, the error function is implemented here (series
below |x| = 2, continued fraction above) and factorials are handled in
log space.  All functions accept scalars or numpy arrays for ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .errors import QuadratureError

__all__ = [
    "PolyOrder",
    "laguerre",
    "laguerre_all",
    "hermite",
    "hermite_all",
    "erf",
    "erfc",
    "log_factorial",
    "log_factorials",
    "check_hermite_laguerre",
    "DEFAULT_QUADRATURE_CAPACITY",
]

DEFAULT_QUADRATURE_CAPACITY = 40

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_ERF_SPLIT = 2.0
_ERF_SERIES_TERMS = 90
_ERFC_CF_DEPTH = 160
# 80-bit extended on x86-64 Linux; falls back to float64 where unsupported
_EXT = np.longdouble


@dataclass(frozen=True)
class PolyOrder:
    """Degree ``n`` and associated index ``alpha`` of L_n^alpha."""

    n: int
    alpha: int = 0

    def __post_init__(self):
        if self.n < 0 or self.alpha < 0:
            raise ValueError(f"polynomial order must be non-negative, got {self}")


def _as_float(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


def laguerre_all(nmax: int, alpha, x) -> np.ndarray:
    """Return ``[L_0^alpha(x), ..., L_nmax^alpha(x)]`` stacked on axis 0.

    ``alpha`` and ``x`` broadcast against each other, so a whole family of
    associated indices can be advanced through the recurrence at once.
    """
    if nmax < 0:
        raise ValueError("nmax must be non-negative")
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    shape = np.broadcast(alpha, x).shape
    out = np.empty((nmax + 1,) + shape)
    out[0] = 1.0
    if nmax == 0:
        return out
    out[1] = 1.0 + alpha - x
    for k in range(1, nmax):
        # (k+1) L_{k+1} = (2k + 1 + alpha - x) L_k - (k + alpha) L_{k-1}
        out[k + 1] = ((2 * k + 1 + alpha - x) * out[k] - (k + alpha) * out[k - 1]) / (k + 1)
    return out


def laguerre(order: PolyOrder | int, x, alpha: int | None = None):
    """Generalized Laguerre polynomial L_n^alpha(x).

    ``order`` may be a :class:`PolyOrder` or the integer degree, in which
    case ``alpha`` gives the associated index (default 0).
    """
    if not isinstance(order, PolyOrder):
        order = PolyOrder(int(order), 0 if alpha is None else int(alpha))
    xa, scalar = _as_float(x)
    n, a = order.n, order.alpha
    if n == 0:
        res = np.ones_like(xa)
    elif n == 1:
        res = 1.0 + a - xa
    elif n == 2:
        res = 0.5 * xa * xa - (a + 2.0) * xa + 0.5 * (a + 1.0) * (a + 2.0)
    else:
        res = laguerre_all(n, a, xa)[n]
    return _ret(res, scalar)


def hermite_all(nmax: int, x, dtype=float) -> np.ndarray:
    """Physicists' Hermite polynomials ``H_0..H_nmax`` at ``x`` on axis 0."""
    if nmax < 0:
        raise ValueError("nmax must be non-negative")
    x = np.asarray(x, dtype=dtype)
    out = np.empty((nmax + 1,) + x.shape, dtype=dtype)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 2.0 * x
    for k in range(1, nmax):
        out[k + 1] = 2.0 * x * out[k] - 2.0 * k * out[k - 1]
    return out


def hermite(n: int, x):
    """Physicists' Hermite polynomial H_n(x)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    xa, scalar = _as_float(x)
    return _ret(hermite_all(n, xa)[n], scalar)


def _erf_series(ax):
    # erf(x) = 2/sqrt(pi) e^{-x^2} sum_k 2^k x^{2k+1} / (2k+1)!!  (all terms positive)
    x2 = ax * ax
    term = ax.copy()
    total = ax.copy()
    for k in range(1, _ERF_SERIES_TERMS):
        term = term * (2.0 * x2) / (2 * k + 1)
        total = total + term
    return _TWO_OVER_SQRT_PI * np.exp(-x2) * total


def _erfc_cf(ax):
    # erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), x > 0
    f = ax.copy()
    for k in range(_ERFC_CF_DEPTH, 0, -1):
        f = ax + (0.5 * k) / f
    return np.exp(-ax * ax) / (math.sqrt(math.pi) * f)


def _erf_erfc_abs(ax):
    """(erf(|x|), erfc(|x|)) for a non-negative array."""
    small = ax < _ERF_SPLIT
    e = np.empty_like(ax)
    c = np.empty_like(ax)
    if small.any():
        s = _erf_series(ax[small])
        e[small] = s
        c[small] = 1.0 - s
    big = ~small
    if big.any():
        with np.errstate(under="ignore"):
            cf = _erfc_cf(ax[big])
        c[big] = cf
        e[big] = 1.0 - cf
    return e, c


def erf(x):
    """Error function, odd by construction."""
    xa, scalar = _as_float(x)
    xa = np.atleast_1d(xa)
    e, _ = _erf_erfc_abs(np.abs(xa))
    res = np.where(xa < 0, -e, e)
    return float(res[0]) if scalar else res


def erfc(x):
    """Complementary error function ``1 - erf(x)`` without cancellation for x > 0."""
    xa, scalar = _as_float(x)
    xa = np.atleast_1d(xa)
    e, c = _erf_erfc_abs(np.abs(xa))
    res = np.where(xa < 0, 1.0 + e, c)
    return float(res[0]) if scalar else res


_STIRLING = (1.0 / 12, -1.0 / 360, 1.0 / 1260, -1.0 / 1680, 1.0 / 1188)


def log_factorial(n: int) -> float:
    """ln(n!), exact summation up to 20 and Stirling's series beyond."""
    n = int(n)
    if n < 0:
        raise ValueError("n must be non-negative")
    if n <= 20:
        return math.log(math.factorial(n))
    inv = 1.0 / n
    inv2 = inv * inv
    corr = 0.0
    p = inv
    for c in _STIRLING:
        corr += c * p
        p *= inv2
    return n * math.log(n) - n + 0.5 * math.log(2.0 * math.pi * n) + corr


def log_factorials(nmax: int) -> np.ndarray:
    """Array of ``ln(k!)`` for ``k = 0..nmax``."""
    return np.array([log_factorial(k) for k in range(nmax + 1)])


@lru_cache(maxsize=None)
def _gauss_hermite_ext(k: int):
    """Gauss-Hermite nodes/weights in extended precision (Newton-polished)."""
    x, _ = hermgauss(k)
    x = x.astype(_EXT)
    for _ in range(3):
        h = hermite_all(k, x, dtype=_EXT)
        x = x - h[k] / (2 * k * h[k - 1])
    h = hermite_all(k, x, dtype=_EXT)
    w = _EXT(2) ** (k - 1) * _EXT(math.factorial(k)) * np.sqrt(_EXT(math.pi)) / (k * k * h[k - 1] ** 2)
    return x, w


def check_hermite_laguerre(n: int, alpha: int, y, t,
                           capacity: int = DEFAULT_QUADRATURE_CAPACITY,
                           method: str = "auto"):
    """Evaluate both sides of the Hermite-Laguerre overlap identity.

    Returns ``(lhs, rhs)`` where ``lhs`` is the Gauss-Hermite quadrature of
    ``int dx/sqrt(pi) e^{-x^2} H_n(x+y) H_{n+alpha}(x+t)`` and ``rhs`` is
    ``2^{n+alpha} n! L_n^alpha(-2yt) t^alpha``.  ``y`` and ``t`` may be
    arrays of equal shape; comparing the two is left to the caller.

    The quadrature runs in extended precision.  With ``method="auto"`` each
    point uses whichever of two equivalent quadratures has the smaller
    rounding-error bound: the direct rule, or the rule applied after
    expanding ``H_{n+alpha}(x+t) = sum_k C(n+alpha,k) (2t)^k H_{n+alpha-k}(x)``
    and keeping only the components of degree <= n (the others are
    orthogonal to ``H_n(x+y)``).  The direct rule alone cancels badly when
    ``|t|`` is small and ``alpha > 0``.

    Raises
    ------
    QuadratureError
        if ``n + alpha`` exceeds ``capacity``.
    """
    if n < 0 or alpha < 0:
        raise ValueError("n and alpha must be non-negative")
    if method not in ("auto", "direct"):
        raise ValueError(f"unknown method {method!r}")
    if n + alpha > capacity:
        raise QuadratureError(
            f"n + alpha = {n + alpha} exceeds quadrature capacity {capacity}")
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    if alpha > 0 and np.any(t == 0):
        raise ValueError("t must be non-zero when alpha > 0")
    scalar = y.ndim == 0 and t.ndim == 0
    y, t = np.broadcast_arrays(y, t)
    shape = y.shape
    yf = y.ravel()
    tf = t.ravel()

    m = n + alpha
    nodes, weights = _gauss_hermite_ext(-(-(2 * n + alpha + 2) // 2) + 8)
    ye = yf.astype(_EXT)
    te = tf.astype(_EXT)
    hy = hermite_all(n, nodes[:, None] + ye[None, :], dtype=_EXT)[n]
    terms = weights[:, None] * hy * hermite_all(m, nodes[:, None] + te[None, :], dtype=_EXT)[m]
    lhs = terms.sum(axis=0)
    if method == "auto":
        bound_direct = np.abs(terms).sum(axis=0)
        hj = hermite_all(n, nodes, dtype=_EXT)
        proj = np.einsum("i,ji,is->js", weights, hj, hy)
        proj_abs = np.einsum("i,ji,is->js", weights, np.abs(hj), np.abs(hy))
        powers = m - np.arange(n + 1)
        binom = np.array([math.comb(m, int(k)) for k in powers], dtype=_EXT)
        coef = binom[:, None] * (2 * te[None, :]) ** powers[:, None]
        lhs_proj = (coef * proj).sum(axis=0)
        bound_proj = (np.abs(coef) * proj_abs).sum(axis=0)
        lhs = np.where(bound_proj < bound_direct, lhs_proj, lhs)
    lhs = (lhs / np.sqrt(_EXT(math.pi))).astype(float)

    lag = np.asarray(laguerre(PolyOrder(n, alpha), -2.0 * yf * tf))
    rhs = 2.0 ** m * math.factorial(n) * lag * tf ** alpha

    lhs = lhs.reshape(shape)
    rhs = rhs.reshape(shape)
    if scalar:
        return float(lhs), float(rhs)
    return lhs, rhs
