"""Truncated two-mode Fock space: twin beams, displacement and moments.

States are stored as an ``(N+1, N+1)`` complex coefficient matrix whose
entry ``[n, m]`` is the amplitude on ``|n>_a (x) |m>_b``.  Everything here
works from the matrices alone, so it serves as a brute-force check on the
closed-form heterodyne and photon-number results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import TruncationError
from .special_fn import laguerre_all, log_factorials

__all__ = [
    "TwinBeamParam",
    "ComplexAmplitude",
    "TwoModeFockState",
    "BeamSplitterSetting",
    "LOCheck",
    "DEFAULT_TRUNCATION_TOL",
    "twin_beams",
    "displacement_matrix",
    "displace_signal",
    "displaced_twin_beams",
    "mean_photons",
    "mean_photons_analytic",
    "z_moments",
    "overlap",
    "bs_displacement",
    "validate_classical_lo",
    "cutoff_for",
]

DEFAULT_TRUNCATION_TOL = 1e-6


@dataclass(frozen=True)
class TwinBeamParam:
    """Twin-beam parameter ``lam`` in [0, 1); ``gain`` is 1/(1 - lam^2)."""

    lam: float

    def __post_init__(self):
        if not (0.0 <= self.lam < 1.0) or not math.isfinite(self.lam):
            raise ValueError(f"twin-beam parameter must lie in [0, 1), got {self.lam}")

    @property
    def gain(self) -> float:
        return 1.0 / (1.0 - self.lam * self.lam)

    @classmethod
    def from_gain(cls, gain: float) -> "TwinBeamParam":
        if gain < 1.0:
            raise ValueError("gain must be >= 1")
        return cls(math.sqrt(1.0 - 1.0 / gain))


@dataclass(frozen=True)
class ComplexAmplitude:
    """Dimensionless complex field amplitude."""

    re: float = 0.0
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError("amplitude components must be finite")

    @classmethod
    def of(cls, z) -> "ComplexAmplitude":
        if isinstance(z, ComplexAmplitude):
            return z
        z = complex(z)
        return cls(z.real, z.imag)

    @classmethod
    def polar(cls, r: float, phi: float) -> "ComplexAmplitude":
        return cls.of(r * complex(math.cos(phi), math.sin(phi)))

    def __complex__(self):
        return complex(self.re, self.im)

    @property
    def abs(self) -> float:
        return math.hypot(self.re, self.im)

    @property
    def abs2(self) -> float:
        return self.re * self.re + self.im * self.im

    @property
    def arg(self) -> float:
        return math.atan2(self.im, self.re)


@dataclass(frozen=True)
class TwoModeFockState:
    """Truncated two-mode pure state.

    ``norm_defect`` is ``1 - sum |coeffs|^2``: the probability that lies
    outside the truncated box.  ``leakage`` is the part of it added by the
    most recent displacement.
    """

    cutoff: int
    coeffs: np.ndarray = field(repr=False)
    norm_defect: float
    leakage: float = 0.0

    def __post_init__(self):
        n = self.cutoff + 1
        if self.cutoff < 0 or self.coeffs.shape != (n, n):
            raise ValueError(f"coeffs must be {n}x{n}, got {self.coeffs.shape}")
        self.coeffs.setflags(write=False)

    @property
    def norm(self) -> float:
        """Captured probability ``sum |coeffs|^2``."""
        return float(np.sum(np.abs(self.coeffs) ** 2))


@dataclass(frozen=True)
class BeamSplitterSetting:
    """Local-oscillator amplitude ``beta`` and transmissivity ``tau``."""

    beta: ComplexAmplitude
    tau: float

    def __post_init__(self):
        if not (0.0 < self.tau < 1.0):
            raise ValueError(f"transmissivity must lie in (0, 1), got {self.tau}")


@dataclass(frozen=True)
class LOCheck:
    ok: bool
    ratio: float
    margin: float


def _state(coeffs: np.ndarray, leakage: float = 0.0) -> TwoModeFockState:
    norm = float(np.sum(np.abs(coeffs) ** 2))
    return TwoModeFockState(coeffs.shape[0] - 1, coeffs, max(0.0, 1.0 - norm), leakage)


def twin_beams(p: TwinBeamParam | float, cutoff: int) -> TwoModeFockState:
    """Twin beams ``sqrt(1-lam^2) sum_n (-lam)^n |n,n>`` truncated at ``cutoff``."""
    if not isinstance(p, TwinBeamParam):
        p = TwinBeamParam(p)
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    lam = p.lam
    diag = math.sqrt(1.0 - lam * lam) * (-lam) ** np.arange(cutoff + 1, dtype=float)
    coeffs = np.diag(diag).astype(complex)
    # geometric tail, exact rather than 1 - sum
    defect = lam ** (2 * (cutoff + 1))
    return TwoModeFockState(cutoff, coeffs, defect)


def displacement_matrix(z, cutoff: int) -> np.ndarray:
    """Matrix ``<m|exp(z a^dag - conj(z) a)|n>`` for ``m, n <= cutoff``.

    Uses ``sqrt(n!/m!) z^(m-n) e^{-|z|^2/2} L_n^(m-n)(|z|^2)`` for ``m >= n``
    and ``sqrt(m!/n!) (-conj z)^(n-m) e^{-|z|^2/2} L_m^(n-m)(|z|^2)`` below
    the diagonal, with factorial ratios and powers of |z| formed in log space.
    """
    z = complex(z)
    size = cutoff + 1
    x = abs(z) ** 2
    if z == 0:
        return np.eye(size, dtype=complex)
    lf = log_factorials(cutoff)
    log_r = math.log(abs(z))
    phase = z / abs(z)
    k = np.arange(size)
    # lag[n, a] = L_n^a(x)
    lag = laguerre_all(cutoff, k.astype(float), x)
    d = np.zeros((size, size), dtype=complex)
    for a in range(size):
        n = np.arange(size - a)
        m = n + a
        logmag = 0.5 * (lf[n] - lf[m]) + a * log_r - 0.5 * x
        mag = np.exp(logmag) * lag[n, a]
        d[m, n] = mag * phase ** a
        if a:
            d[n, m] = mag * (-phase.conjugate()) ** a
    return d


def displace_signal(state: TwoModeFockState, z,
                    tol: float = DEFAULT_TRUNCATION_TOL) -> TwoModeFockState:
    """Apply the signal-mode (first index) displacement by ``z``.

    The result keeps the input cutoff; the probability pushed past it is
    reported as ``leakage`` and folded into ``norm_defect``.

    Raises
    ------
    TruncationError
        if the resulting ``norm_defect`` exceeds ``tol``.
    """
    z = complex(z)
    if z == 0:
        return state
    d = displacement_matrix(z, state.cutoff)
    coeffs = d @ state.coeffs
    out_norm = float(np.sum(np.abs(coeffs) ** 2))
    leakage = max(0.0, state.norm - out_norm)
    defect = max(0.0, state.norm_defect + leakage)
    if defect > tol:
        raise TruncationError(
            f"norm defect {defect:.3e} exceeds tolerance {tol:.1e} at cutoff "
            f"{state.cutoff}; raise the cutoff")
    return TwoModeFockState(state.cutoff, coeffs, defect, leakage)


def displaced_twin_beams(p: TwinBeamParam | float, w, cutoff: int | None = None,
                         epsilon: float = 1e-8,
                         tol: float = DEFAULT_TRUNCATION_TOL) -> TwoModeFockState:
    """Twin beams displaced by ``w`` on the signal mode.

    The cutoff defaults to :func:`cutoff_for` at ``epsilon``.
    """
    if not isinstance(p, TwinBeamParam):
        p = TwinBeamParam(p)
    if cutoff is None:
        cutoff = cutoff_for(p, w, epsilon)
    return displace_signal(twin_beams(p, cutoff), w, tol=tol)


def mean_photons(state: TwoModeFockState) -> float:
    """Truncated ``<a^dag a + b^dag b>``; not renormalized."""
    k = np.arange(state.cutoff + 1)
    return float(np.sum((k[:, None] + k[None, :]) * np.abs(state.coeffs) ** 2))


def mean_photons_analytic(p: TwinBeamParam | float, z) -> float:
    """Mean total photon number ``|z|^2 + 2 lam^2 / (1 - lam^2)``."""
    if not isinstance(p, TwinBeamParam):
        p = TwinBeamParam(p)
    lam2 = p.lam * p.lam
    return abs(complex(z)) ** 2 + 2.0 * lam2 / (1.0 - lam2)


def z_moments(state: TwoModeFockState, tol: float = DEFAULT_TRUNCATION_TOL):
    """Mean and second central moment of the photocurrent ``Z = a + b^dag``.

    Expectations are taken in the renormalized truncated state.  ``Z psi``
    is formed in an ``(N+1) x (N+2)`` box so that ``b^dag`` does not drop
    the top row.  Since ``[Z, Z^dag] = 0`` the second central moment is
    ``||Z psi||^2 - |<Z>|^2``.

    Returns
    -------
    (ComplexAmplitude, float)
    """
    if state.norm_defect > tol:
        raise TruncationError(
            f"norm defect {state.norm_defect:.3e} exceeds tolerance {tol:.1e}; "
            "moments would be biased")
    c = state.coeffs
    size = state.cutoff + 1
    k = np.sqrt(np.arange(size + 1, dtype=float))
    zpsi = np.zeros((size, size + 1), dtype=complex)
    # (a psi)[n, m] = sqrt(n+1) c[n+1, m]
    zpsi[:-1, :size] += k[1:size, None] * c[1:, :]
    # (b^dag psi)[n, m] = sqrt(m) c[n, m-1]
    zpsi[:, 1:] += k[None, 1:size + 1] * c
    norm = state.norm
    mean = np.sum(np.conj(c) * zpsi[:, :size]) / norm
    second = np.sum(np.abs(zpsi) ** 2) / norm - abs(mean) ** 2
    return ComplexAmplitude.of(mean), float(second)


def overlap(s1: TwoModeFockState, s2: TwoModeFockState) -> complex:
    """``<s1|s2>`` over the truncated box."""
    if s1.cutoff != s2.cutoff:
        raise ValueError(f"cutoff mismatch: {s1.cutoff} != {s2.cutoff}")
    return complex(np.vdot(s1.coeffs, s2.coeffs))


def bs_displacement(setting: BeamSplitterSetting) -> ComplexAmplitude:
    """Displacement ``z = beta sqrt(1 - tau)`` in the strong-LO, tau -> 1 limit."""
    return ComplexAmplitude.of(complex(setting.beta) * math.sqrt(1.0 - setting.tau))


def validate_classical_lo(setting: BeamSplitterSetting, p: TwinBeamParam | float,
                          margin: float = 100.0) -> LOCheck:
    """Check ``|beta|^2 >= margin / (1 - lam)``, the classical-LO condition.

    ``ratio`` is ``|beta|^2 (1 - lam)``: LO intensity over the twin-beam
    input photon scale.
    """
    if not isinstance(p, TwinBeamParam):
        p = TwinBeamParam(p)
    ratio = setting.beta.abs2 * (1.0 - p.lam)
    return LOCheck(ratio >= margin, ratio, margin)


def cutoff_for(p: TwinBeamParam | float, z, epsilon: float) -> int:
    """Smallest cutoff keeping the displaced twin beams' norm defect <= epsilon.

    Starts from the larger of the geometric-tail bound
    ``lam^(2(N+1)) <= epsilon`` and the margin ``N >= |z|^2 + 6|z| + 10``,
    then for ``z != 0`` raises ``N`` until the constructed state meets
    ``epsilon``.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    if not isinstance(p, TwinBeamParam):
        p = TwinBeamParam(p)
    r = abs(complex(z))
    n = math.ceil(r * r + 6.0 * r + 10.0)
    if p.lam > 0.0:
        tail = math.ceil(math.log(epsilon) / (2.0 * math.log(p.lam))) - 1
        while p.lam ** (2 * (tail + 1)) > epsilon:
            tail += 1
        n = max(n, tail)
    if r == 0.0:
        return n
    while True:
        state = displace_signal(twin_beams(p, n), z, tol=1.0)
        if state.norm_defect <= epsilon:
            return n
        n += 1
