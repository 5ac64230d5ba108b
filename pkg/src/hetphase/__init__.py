"""Two-mode heterodyne phase detection with twin beams.

Submodules: :mod:`~hetphase.special_fn`, :mod:`~hetphase.fock`,
:mod:`~hetphase.heterodyne`, :mod:`~hetphase.phase`, :mod:`~hetphase.cli`.
"""

__version__ = "0.1.0"

from .errors import (HetphaseError, QuadratureError, RegimeError, SeriesConvergenceError,
                     TruncationError)
from .fock import (BeamSplitterSetting, ComplexAmplitude, TwinBeamParam, TwoModeFockState,
                   bs_displacement, cutoff_for, displace_signal, displaced_twin_beams,
                   mean_photons, mean_photons_analytic, overlap, twin_beams,
                   validate_classical_lo, z_moments)
from .heterodyne import (HeterodyneModel, SampleBatch, density_closed, density_series,
                         eigenstate_coeff, kernel_concentration, sample, variance)
from .phase import (PhaseDistribution, SensitivityResult, estimate_phase, gain_tuning,
                    optimize_signal_split, phase_density, phase_density_gaussian,
                    phase_distribution, phase_rms_exact, phase_rms_gaussian, shot_noise_limit)
