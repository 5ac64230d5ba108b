"""Phase of the heterodyne photocurrent and the achievable sensitivity.

Phases are measured on ``(theta - pi, theta + pi]`` with ``theta = arg w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import RegimeError
from .fock import TwinBeamParam
from .heterodyne import HeterodyneModel, SampleBatch, density_closed, variance
from .special_fn import erfc

__all__ = [
    "PhaseDistribution",
    "SensitivityResult",
    "GainSetting",
    "GAUSSIAN_GUARD",
    "phase_density",
    "phase_density_gaussian",
    "phase_density_marginal",
    "phase_distribution",
    "phase_rms_gaussian",
    "phase_rms_exact",
    "golden_section",
    "split_objective",
    "optimize_signal_split",
    "grid_scan_split",
    "shot_noise_limit",
    "gain_tuning",
    "estimate_phase",
    "wrap",
]

GAUSSIAN_GUARD = 0.2
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PhaseDistribution:
    theta: float
    grid: np.ndarray
    density: np.ndarray

    @property
    def integral(self) -> float:
        """Trapezoidal integral; the density is 2pi-periodic so the rule closes."""
        return float(np.sum(self.density) * (2.0 * math.pi / len(self.grid)))


@dataclass(frozen=True)
class SensitivityResult:
    nbar: float
    eta: float
    w_sq_opt: float
    lambda_opt: float
    delta_phi_gauss: float
    delta_phi_exact: float
    gain: float
    product: float
    iterations: int = 0

    @property
    def split(self) -> float:
        return self.w_sq_opt / self.nbar


@dataclass(frozen=True)
class GainSetting:
    gain: float
    lam: float
    eta_threshold: float


def wrap(a):
    """Wrap angles to ``(-pi, pi]``."""
    a = np.asarray(a, dtype=float)
    out = -((-a + math.pi) % (2.0 * math.pi)) + math.pi
    return float(out) if out.ndim == 0 else out


def phase_density(phi, model: HeterodyneModel):
    """Marginal density of ``arg Z``.

    ``p = e^{-s}/(2pi) + (|w|/(pi D)) c (sqrt(pi)/2) erfc(-|w| c / D) e^{-s sin^2}``
    with ``s = |w|^2/D^2``, ``c = cos(phi - theta)`` and ``D^2`` the outcome
    variance.  ``1 + erf`` is written as ``erfc`` so the far tail keeps its
    relative accuracy.
    """
    d = math.sqrt(model.var)
    r = model.w.abs
    delta = np.asarray(phi, dtype=float) - model.w.arg
    c = np.cos(delta)
    s2 = np.sin(delta) ** 2
    snr = r / d
    uniform = math.exp(-snr * snr) / (2.0 * math.pi)
    peak = (snr / math.pi) * c * (math.sqrt(math.pi) / 2.0) * erfc(-snr * c) * np.exp(-snr * snr * s2)
    out = uniform + peak
    return float(out) if out.ndim == 0 else out


def _check_gaussian_regime(model: HeterodyneModel, guard: float) -> None:
    r = model.w.abs
    if r == 0.0 or math.sqrt(model.var) / r > guard:
        raise RegimeError(
            f"Gaussian phase density needs Delta/|w| <= {guard}; "
            f"got {math.sqrt(model.var) / r if r else math.inf:.3g}")


def phase_density_gaussian(phi, model: HeterodyneModel, guard: float = GAUSSIAN_GUARD):
    """Gaussian approximation ``|w|/(sqrt(pi) D) exp(-(|w|/D)^2 (phi - theta)^2)``.

    Raises
    ------
    RegimeError
        unless ``D/|w| <= guard``.
    """
    _check_gaussian_regime(model, guard)
    snr = model.w.abs / math.sqrt(model.var)
    delta = np.asarray(phi, dtype=float) - model.w.arg
    out = snr / math.sqrt(math.pi) * np.exp(-(snr * delta) ** 2)
    return float(out) if out.ndim == 0 else out


def phase_density_marginal(phi: float, model: HeterodyneModel,
                           epsabs: float = 1e-12) -> float:
    """Integrate the 2-D outcome density along the ray ``arg z = phi``.

    ``int_0^inf dr r P(r e^{i phi})`` by adaptive quadrature; used to check
    :func:`phase_density` independently.
    """
    d = math.sqrt(model.var)
    w = complex(model.w)
    u = complex(math.cos(phi), math.sin(phi))
    centre = max(0.0, (w.conjugate() * u).real)
    upper = centre + 12.0 * d

    def f(r):
        return r * density_closed(r * u, model)

    pts = [p for p in (centre - 3 * d, centre, centre + 3 * d) if 0.0 < p < upper]
    val, _ = integrate.quad(f, 0.0, upper, points=pts or None, epsabs=epsabs,
                            epsrel=1e-12, limit=200)
    return val


def phase_distribution(model: HeterodyneModel, grid_points: int = 1024) -> PhaseDistribution:
    """Tabulate :func:`phase_density` on ``grid_points`` uniform points of
    ``(theta - pi, theta + pi]``."""
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    theta = model.w.arg
    h = 2.0 * math.pi / grid_points
    grid = theta - math.pi + h * np.arange(1, grid_points + 1)
    return PhaseDistribution(theta, grid, phase_density(grid, model))


def phase_rms_gaussian(model: HeterodyneModel) -> float:
    """r.m.s. phase width ``D / (sqrt(2) |w|)`` of the Gaussian approximation."""
    r = model.w.abs
    if r == 0.0:
        raise ValueError("phase sensitivity undefined for zero signal")
    return math.sqrt(model.var) / (math.sqrt(2.0) * r)


def phase_rms_exact(model: HeterodyneModel, allow_zero: bool = False) -> float:
    """Root of the second moment of ``phi - theta`` under the exact density.

    Integrates over ``(-pi, pi]`` using the symmetry about ``theta``; the
    interval is split at multiples of the Gaussian width so the quadrature
    resolves narrow peaks.
    """
    r = model.w.abs
    if r == 0.0 and not allow_zero:
        raise ValueError("phase sensitivity undefined for zero signal")
    theta = model.w.arg
    width = math.sqrt(model.var) / (math.sqrt(2.0) * r) if r else math.pi

    def f(delta):
        return delta * delta * phase_density(theta + delta, model)

    edges = sorted({0.0, math.pi} | {k * width for k in (1, 2, 4, 8, 16, 32) if k * width < math.pi})
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(f, a, b, epsabs=1e-10 / len(edges), epsrel=1e-12, limit=200)
        if not math.isfinite(val) or err > 1e-8:
            raise ArithmeticError(f"phase second-moment quadrature failed on [{a}, {b}]")
        total += val
    return math.sqrt(2.0 * total)


def golden_section(f, lo: float, hi: float, tol: float = 1e-6, max_iter: int = 500):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x), iterations)``."""
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while b - a > tol and it < max_iter:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
        it += 1
    x = 0.5 * (a + b)
    return x, f(x), it


def _lambda_for_twins(twins: float) -> float:
    # twin photons 2 lam^2/(1 - lam^2) = twins
    return math.sqrt(twins / (twins + 2.0))


def split_objective(s: float, nbar: float, eta: float) -> float:
    """Gaussian r.m.s. phase width with a fraction ``s`` of ``nbar`` in the signal."""
    lam = _lambda_for_twins((1.0 - s) * nbar)
    var = (1.0 - lam) / (1.0 + lam) + (1.0 - eta) / eta
    return math.sqrt(var / (2.0 * s * nbar))


def _result(s: float, nbar: float, eta: float, iterations: int = 0) -> SensitivityResult:
    lam = _lambda_for_twins((1.0 - s) * nbar)
    w_sq = s * nbar
    model = HeterodyneModel(TwinBeamParam(lam), math.sqrt(w_sq), eta)
    gauss = phase_rms_gaussian(model)
    return SensitivityResult(
        nbar=nbar, eta=eta, w_sq_opt=w_sq, lambda_opt=lam,
        delta_phi_gauss=gauss, delta_phi_exact=phase_rms_exact(model),
        gain=1.0 / (1.0 - lam * lam), product=gauss * nbar, iterations=iterations)


def _check_budget(nbar: float, eta: float) -> None:
    if not (nbar > 0.0) or not math.isfinite(nbar):
        raise ValueError(f"photon budget must be positive, got {nbar}")
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"efficiency must lie in (0, 1], got {eta}")


def optimize_signal_split(nbar: float, eta: float = 1.0, tol: float = 1e-6) -> SensitivityResult:
    """Best split of a mean photon budget between signal and twin beams.

    Minimizes the Gaussian phase width over ``s = |w|^2 / nbar`` by golden
    section, with the twin-beam parameter fixed by the exact photon count
    ``nbar = |w|^2 + 2 lam^2 / (1 - lam^2)``.  The exact r.m.s. at the
    optimum is reported next to the Gaussian one.
    """
    _check_budget(nbar, eta)
    s, _, it = golden_section(lambda v: split_objective(v, nbar, eta), 0.0 + 1e-12, 1.0 - 1e-12, tol)
    return _result(s, nbar, eta, it)


def grid_scan_split(nbar: float, eta: float = 1.0, points: int = 10_000) -> tuple[float, float]:
    """Brute-force minimum of :func:`split_objective` on a uniform grid of ``s``.

    Returns ``(s_best, step)``.
    """
    _check_budget(nbar, eta)
    s = (np.arange(points) + 0.5) / points
    lam = np.sqrt((1.0 - s) * nbar / ((1.0 - s) * nbar + 2.0))
    var = (1.0 - lam) / (1.0 + lam) + (1.0 - eta) / eta
    obj = np.sqrt(var / (2.0 * s * nbar))
    return float(s[np.argmin(obj)]), 1.0 / points


def shot_noise_limit(nbar: float, eta: float) -> float:
    """Shot-noise phase sensitivity ``sqrt((1 - eta) / (2 nbar))``."""
    if not (nbar > 0.0):
        raise ValueError("nbar must be positive")
    if not (0.0 < eta < 1.0):
        raise ValueError("shot-noise limit needs 0 < eta < 1")
    return math.sqrt((1.0 - eta) / (2.0 * nbar))


def gain_tuning(nbar: float) -> GainSetting:
    """Amplifier gain ``nbar/4`` for the optimal split, its twin-beam parameter
    and the efficiency threshold ``2/nbar`` that ``1 - eta`` must stay well below."""
    if not (nbar > 4.0):
        raise ValueError("gain tuning needs nbar > 4")
    g = nbar / 4.0
    return GainSetting(g, math.sqrt(1.0 - 1.0 / g), 2.0 / nbar)


def estimate_phase(batch: SampleBatch | np.ndarray) -> tuple[float, float]:
    """Resultant-vector phase estimate and r.m.s. spread of the sample phases."""
    z = batch.outcomes if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=complex)
    if len(z) < 2:
        raise ValueError("need at least two outcomes")
    resultant = complex(np.sum(z))
    if resultant == 0:
        raise ValueError("zero resultant; phase undefined")
    theta_hat = math.atan2(resultant.imag, resultant.real)
    dev = wrap(np.angle(z) - theta_hat)
    return theta_hat, float(np.std(dev, ddof=1))
