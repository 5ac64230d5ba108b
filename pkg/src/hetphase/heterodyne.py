"""Heterodyne outcome statistics for displaced twin beams.

The photocurrent ``Z = a + b^dag`` of a heterodyne detector fed with twin
beams displaced by ``w`` has a complex Gaussian outcome density centred on
``w`` whose variance shrinks to zero as the twin-beam parameter goes to one.
This module holds the number-basis eigenstates of ``Z``, two independent
evaluations of the outcome density, the variance law (with detector
efficiency) and a reproducible Monte Carlo sampler.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, localcontext

import numpy as np

from .errors import SeriesConvergenceError
from .fock import ComplexAmplitude, TwinBeamParam
from .special_fn import laguerre, laguerre_all, log_factorial, log_factorials, PolyOrder

__all__ = [
    "HeterodyneModel",
    "SampleBatch",
    "eigenstate_coeff",
    "eigenstate_matrix",
    "variance",
    "density_series",
    "density_closed",
    "sample",
    "kernel_concentration",
    "SHARD_SIZE",
]

_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)
_EPS = np.finfo(float).eps
_LAMBDA_LIMIT = 1.0 - 1e-9
_MAX_TERMS = 2_000_000
SHARD_SIZE = 1 << 16


@dataclass(frozen=True)
class HeterodyneModel:
    """Twin-beam parameter, signal amplitude ``w`` and quantum efficiency ``eta``."""

    p: TwinBeamParam
    w: ComplexAmplitude = ComplexAmplitude()
    eta: float = 1.0

    def __post_init__(self):
        if not isinstance(self.p, TwinBeamParam):
            object.__setattr__(self, "p", TwinBeamParam(self.p))
        object.__setattr__(self, "w", ComplexAmplitude.of(self.w))
        if not (0.0 < self.eta <= 1.0):
            raise ValueError(f"efficiency must lie in (0, 1], got {self.eta}")

    @classmethod
    def make(cls, lam: float, w=0.0, eta: float = 1.0) -> "HeterodyneModel":
        return cls(TwinBeamParam(lam), ComplexAmplitude.of(w), eta)

    @property
    def lam(self) -> float:
        return self.p.lam

    @property
    def var(self) -> float:
        return variance(self.p, self.eta)


@dataclass(frozen=True)
class SampleBatch:
    seed: int
    count: int
    outcomes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.outcomes) != self.count:
            raise ValueError("outcomes length must equal count")
        self.outcomes.setflags(write=False)


def eigenstate_coeff(n: int, m: int, z) -> complex:
    """Number-basis coefficient ``c_{n,m}(z, conj z)`` of the ``Z`` eigenstate.

    For ``m = n + a`` (``a >= 0``)::

        c = (-1)^n / sqrt(pi) * sqrt(n!/(n+a)!) * conj(z)^a * L_n^a(|z|^2) * exp(-|z|^2/2)

    and ``c_{n+a, n} = conj(c_{n, n+a})``.  The global phase
    ``exp(i Re z Im z)`` of the eigenvector is left out.
    """
    if n < 0 or m < 0:
        raise ValueError("indices must be non-negative")
    z = complex(z)
    lo, a = min(n, m), abs(m - n)
    x = abs(z) ** 2
    if a and z == 0:
        return 0j
    lag = laguerre(PolyOrder(lo, a), x)
    mag = math.exp(0.5 * (log_factorial(lo) - log_factorial(lo + a)) - 0.5 * x)
    c = (-1) ** lo * _INV_SQRT_PI * mag * lag * z.conjugate() ** a
    return c if m >= n else c.conjugate()


def eigenstate_matrix(z, cutoff: int) -> np.ndarray:
    """All ``c_{n,m}(z)`` for ``n, m <= cutoff`` as a matrix."""
    z = complex(z)
    size = cutoff + 1
    x = abs(z) ** 2
    k = np.arange(size)
    lf = log_factorials(cutoff)
    lag = laguerre_all(cutoff, k.astype(float), x)
    out = np.zeros((size, size), dtype=complex)
    zc = z.conjugate()
    for a in range(size):
        if a and z == 0:
            break
        n = np.arange(size - a)
        c = ((-1.0) ** n * _INV_SQRT_PI * np.exp(0.5 * (lf[n] - lf[n + a]) - 0.5 * x)
             * lag[n, a] * zc ** a)
        out[n, n + a] = c
        out[n + a, n] = np.conj(c)
    return out


def variance(p: TwinBeamParam | float, eta: float = 1.0) -> float:
    """Outcome variance ``(1 - lam)/(1 + lam) + (1 - eta)/eta``."""
    if not isinstance(p, TwinBeamParam):
        p = TwinBeamParam(p)
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"efficiency must lie in (0, 1], got {eta}")
    return (1.0 - p.lam) / (1.0 + p.lam) + (1.0 - eta) / eta


def density_closed(z, model: HeterodyneModel):
    """Complex Gaussian outcome density per unit ``d(Re z) d(Im z)``."""
    d2 = model.var
    r2 = np.abs(np.asarray(z, dtype=complex) - complex(model.w)) ** 2
    out = np.exp(-r2 / d2) / (math.pi * d2)
    return float(out) if out.ndim == 0 else out


def _series_float(x, lam, tol):
    """Float pass over the Laguerre series; returns (density, trusted mask)."""
    ex = np.exp(-0.5 * x)
    l_prev = np.zeros_like(x)
    l_cur = np.ones_like(x)
    power = 1.0
    acc = ex.copy()
    acc_abs = ex.copy()
    done = np.zeros(x.shape, dtype=bool)
    result = np.zeros_like(x)
    n = 0
    while True:
        tail = lam ** (n + 1) / (1.0 - lam) if lam > 0 else 0.0
        rounding = 32.0 * _EPS * acc_abs
        good = ~done & (2.0 * (tail + rounding) <= tol * np.abs(acc))
        result[good] = acc[good]
        done |= good
        # no further progress possible in double precision
        stuck = tail <= _EPS * acc_abs
        if done.all() or stuck.all() or lam == 0.0:
            break
        l_next = ((2 * n + 1 - x) * l_cur - n * l_prev) / (n + 1)
        l_prev, l_cur = l_cur, l_next
        n += 1
        power *= lam
        term = power * l_cur * ex
        acc += term
        acc_abs += np.abs(term)
    return (1.0 - lam * lam) / math.pi * result ** 2, done


def _series_decimal(x: float, lam: float, tol: float) -> float:
    """Extended-precision summation for points where cancellation is severe."""
    dx = Decimal(x)
    dl = Decimal(lam)
    digits = 30 + max(0, -math.floor(math.log10(tol)))
    half_x = x / 2.0
    while True:
        with localcontext() as ctx:
            ctx.prec = digits
            l_prev, l_cur = Decimal(0), Decimal(1)
            power = Decimal(1)
            total = Decimal(1)
            biggest = Decimal(1)
            n = 0
            while True:
                if n > _MAX_TERMS:
                    raise SeriesConvergenceError(
                        f"series did not converge in {_MAX_TERMS} terms")
                # |L_n(x)| <= e^{x/2}
                log_tail = (n + 1) * math.log(lam) - math.log1p(-lam) + half_x
                if total != 0:
                    log_total = math.log(abs(total))
                    if log_tail <= math.log(tol / 4.0) + log_total:
                        break
                l_next = ((2 * n + 1 - dx) * l_cur - n * l_prev) / (n + 1)
                l_prev, l_cur = l_cur, l_next
                n += 1
                power *= dl
                term = power * l_cur
                total += term
                if abs(term) > biggest:
                    biggest = abs(term)
            # rounding error of the recurrence and sum, relative to the result
            lost = math.log10(float(biggest)) - float(abs(total).log10()) + math.log10(n + 1)
            if lost + 2 < digits + math.log10(tol / 4.0):
                value = (-dx).exp() * total * total
                return float(value) * (1.0 - lam * lam) / math.pi
        digits = int(math.ceil(lost - math.log10(tol))) + 20


def density_series(z, model: HeterodyneModel, tol: float = 1e-12):
    """Outcome density from the Laguerre series of twin-beam overlaps.

    Sums ``(1 - lam^2)/pi * e^{-x} |sum_n lam^n L_n(x)|^2`` with
    ``x = |z - w|^2`` until the geometric tail bound (``|L_n(x) e^{-x/2}| <= 1``)
    certifies relative error ``<= tol``.  Points where the alternating series
    cancels below double-precision resolution are re-summed in decimal
    arithmetic at a working precision raised until the rounding estimate
    also meets ``tol``.

    Raises
    ------
    ValueError
        if ``model.eta != 1``; the series is only known for a perfect detector.
    SeriesConvergenceError
        if ``lam >= 1 - 1e-9``.
    """
    if model.eta != 1.0:
        raise ValueError("the series form requires unit efficiency")
    if tol <= 0:
        raise ValueError("tol must be positive")
    lam = model.lam
    if lam >= _LAMBDA_LIMIT:
        raise SeriesConvergenceError(
            f"lambda = {lam} too close to 1 for the series; use density_closed")
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    x = np.atleast_1d(np.abs(z - complex(model.w)) ** 2).astype(float)
    flat = x.ravel()
    dens, ok = _series_float(flat, lam, tol)
    for i in np.flatnonzero(~ok):
        dens[i] = _series_decimal(float(flat[i]), lam, tol)
    dens = dens.reshape(x.shape)
    return float(dens[0]) if scalar else dens


def _draw_shard(seed: int, shard: int, size: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, shard], dtype=np.uint64)))
    g = gen.standard_normal((size, 2))
    return g[:, 0] + 1j * g[:, 1]


def sample(model: HeterodyneModel, count: int, seed: int, workers: int = 1) -> SampleBatch:
    """Draw ``count`` photocurrent outcomes ``w + Delta (g1 + i g2)/sqrt(2)``.

    Normal deviates come from Philox streams keyed by ``(seed, shard)`` with
    fixed-size shards, so the batch does not depend on ``workers``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    seed = int(seed)
    if not (0 <= seed < 2 ** 64):
        raise ValueError("seed must be an unsigned 64-bit integer")
    sizes = [SHARD_SIZE] * (count // SHARD_SIZE)
    if count % SHARD_SIZE:
        sizes.append(count % SHARD_SIZE)
    jobs = [(seed, i, s) for i, s in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda j: _draw_shard(*j), jobs))
    else:
        parts = [_draw_shard(*j) for j in jobs]
    g = np.concatenate(parts)
    scale = math.sqrt(model.var / 2.0)
    return SampleBatch(seed, count, complex(model.w) + scale * g)


def kernel_concentration(lambdas, w=0.0) -> list[tuple[float, float]]:
    """Outcome variance for each twin-beam parameter in ``lambdas``.

    The overlap density ``|<<z|w>>_lam|^2`` is a Gaussian of this variance
    around ``w``, so a shrinking sequence shows the states approaching the
    ``Z`` eigenstate.  The density does not depend on ``w`` beyond its centre.
    """
    ComplexAmplitude.of(w)
    return [(float(lam), variance(TwinBeamParam(lam))) for lam in lambdas]
