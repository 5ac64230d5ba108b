"""Oracle suites run by ``hetphase verify``.

Each suite compares a closed-form result with an independent computation
and returns a :class:`SuiteResult` with the worst error seen.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .fock import cutoff_for, displaced_twin_beams, mean_photons, mean_photons_analytic, z_moments
from .heterodyne import HeterodyneModel, density_closed, density_series, variance
from .phase import phase_density, phase_density_marginal, phase_distribution
from .special_fn import check_hermite_laguerre

__all__ = ["SuiteResult", "SUITES", "run_all", "disk_integral"]

VERIFY_SEED = 20240601


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst: float
    tol: float
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: worst={self.worst:.3e} tol={self.tol:.1e} "
                f"time={self.seconds:.2f}s")


def _timed(name, tol, fn):
    t0 = time.perf_counter()
    worst = float(fn())
    return SuiteResult(name, bool(worst <= tol), worst, tol, time.perf_counter() - t0)


def disk_integral(model: HeterodyneModel, radius_sigmas: float = 6.0,
                  radial_points: int = 8193, angular_points: int = 64) -> float:
    """Trapezoidal integral of the outcome density over a disk centred on ``w``.

    Polar grid; the angular rule is periodic and the radial rule carries the
    ``r`` Jacobian.
    """
    d = math.sqrt(model.var)
    r = np.linspace(0.0, radius_sigmas * d, radial_points)
    ang = 2.0 * math.pi * np.arange(angular_points) / angular_points
    z = complex(model.w) + r[:, None] * np.exp(1j * ang)[None, :]
    ring = density_closed(z, model).mean(axis=1) * 2.0 * math.pi * r
    return float(np.trapezoid(ring, r))


def hermite_laguerre_worst(nmax: int = 20, amax: int = 10, samples: int = 100,
                           seed: int = VERIFY_SEED) -> float:
    rng = np.random.default_rng(seed)
    y = rng.uniform(-2.0, 2.0, samples)
    t = rng.uniform(-2.0, 2.0, samples)
    worst = 0.0
    for n in range(nmax + 1):
        for a in range(amax + 1):
            lhs, rhs = check_hermite_laguerre(n, a, y, t)
            worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.abs(rhs))))
    return worst


SERIES_LAMBDAS = (0.0, 0.25, 0.5, 0.75, 0.9)
SERIES_RADII = tuple(np.arange(17) * 0.25)


def series_closed_worst(lambdas=SERIES_LAMBDAS, radii=SERIES_RADII,
                        w=0.7 - 0.4j, direction: float = 0.9) -> float:
    worst = 0.0
    r = np.asarray(radii, dtype=float)
    for lam in lambdas:
        model = HeterodyneModel.make(lam, w)
        z = w + r * complex(math.cos(direction), math.sin(direction))
        s = density_series(z, model, tol=1e-10)
        c = density_closed(z, model)
        worst = max(worst, float(np.max(np.abs(s / c - 1.0))))
    return worst


MOMENT_LAMBDAS = (0.0, 0.3, 0.6, 0.9)
MOMENT_AMPLITUDES = (0.0, 1.0, 2.0)


def fock_moments_worst(lambdas=MOMENT_LAMBDAS, amplitudes=MOMENT_AMPLITUDES,
                       epsilon: float = 1e-8, perturbation: float = 0.0,
                       phase: float = 0.6):
    """Worst (variance error, mean-photon error, mean-amplitude error)."""
    worst_var = worst_n = worst_mean = 0.0
    for lam in lambdas:
        for a in amplitudes:
            w = a * complex(math.cos(phase), math.sin(phase))
            state = displaced_twin_beams(lam, w, cutoff_for(lam, w, epsilon))
            mean, second = z_moments(state)
            worst_var = max(worst_var, abs(second - (variance(lam) + perturbation)))
            worst_mean = max(worst_mean, abs(complex(mean) - w))
            worst_n = max(worst_n, abs(mean_photons(state) - mean_photons_analytic(lam, w)))
    return worst_var, worst_n, worst_mean


PHASE_LAMBDAS = (0.0, 0.5, 0.9, 0.99)
PHASE_AMPLITUDES = (0.0, 0.5, 2.0, 10.0)
PHASE_ETAS = (1.0, 0.8)


def _phase_lattice(theta=0.4):
    for lam in PHASE_LAMBDAS:
        for a in PHASE_AMPLITUDES:
            for eta in PHASE_ETAS:
                yield HeterodyneModel.make(lam, a * complex(math.cos(theta), math.sin(theta)), eta)


def phase_normalization_worst(grid_points: int = 4096) -> float:
    return max(abs(phase_distribution(m, grid_points).integral - 1.0) for m in _phase_lattice())


def phase_marginal_worst(angles: int = 9) -> float:
    worst = 0.0
    for m in _phase_lattice():
        theta = m.w.arg
        # include points on the peak, its flanks and the far side
        width = math.sqrt(m.var) / max(m.w.abs, 1e-300)
        offsets = np.concatenate([np.linspace(-math.pi + 0.05, math.pi, angles),
                                  np.array([0.5, 1.0, 2.0]) * min(width, 1.0)])
        for phi in theta + offsets:
            worst = max(worst, abs(phase_density_marginal(float(phi), m) - phase_density(float(phi), m)))
    return worst


def disk_normalization_worst() -> float:
    return max(abs(disk_integral(m) - 1.0) for m in _phase_lattice())


def run_all(perturbation: float = 0.0) -> list[SuiteResult]:
    results = [
        _timed("hermite-laguerre identity", 1e-8, hermite_laguerre_worst),
        _timed("density series vs closed form", 1e-8, series_closed_worst),
    ]
    t0 = time.perf_counter()
    var_err, n_err, _ = fock_moments_worst(perturbation=perturbation)
    dt = time.perf_counter() - t0
    results.append(SuiteResult("fock variance moments", var_err <= 1e-4, var_err, 1e-4, dt))
    results.append(SuiteResult("fock mean photons", n_err <= 1e-5, n_err, 1e-5, 0.0))
    results.append(_timed("outcome density normalization", 1e-6, disk_normalization_worst))
    results.append(_timed("phase density normalization", 1e-6, phase_normalization_worst))
    results.append(_timed("phase density marginalization", 1e-6, phase_marginal_worst))
    return results


SUITES = ("hermite-laguerre identity", "density series vs closed form", "fock variance moments",
          "fock mean photons", "outcome density normalization", "phase density normalization",
          "phase density marginalization")
