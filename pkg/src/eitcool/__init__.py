"""Dark-resonance spectroscopy and cooling of a single optically trapped atom.

Subpackages cover the analytic dressed-state spectra (:mod:`eitcool.spectra`),
the three-level optical Bloch equations (:mod:`eitcool.bloch`), sideband
cooling rate equations (:mod:`eitcool.cooling`), the Gaussian dipole trap
(:mod:`eitcool.trap`), Monte-Carlo release-recapture thermometry
(:mod:`eitcool.thermometry`) and nonlinear fitting (:mod:`eitcool.fit`).
The :mod:`eitcool.cli` scenario runner exposes every pipeline as a
reproducible command.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .core import (CONSTANTS, LambdaParams, PhysicalConstants, Spectrum,
                   angular_to_khz, angular_to_mhz, khz_to_angular,
                   mhz_to_angular, rabi_to_saturation, saturation_to_rabi)
from .spectra import (ComplexEigenvalues, DressedPair, audit_width_conventions,
                      dressed_perturbative, dressed_probe_corrected,
                      exact_eigenvalues, fano_intensity, fano_spectrum,
                      multi_lambda_spectrum)
from .bloch import (build_liouvillian, excitation_spectrum_obe, scattering_rate,
                    steady_state, time_evolve)
from .trap import TrapGeometry, depth_from_radial_frequency, potential, trap_frequencies
from .cooling import (BeamGeometry, CoolingMap, MotionalMode, SidebandRates,
                      cooling_map, cooling_rate, ground_state_size, lamb_dicke,
                      optimal_coupling_rabi, orthogonal_beam_geometry,
                      phonon_dynamics, phonon_to_temperature, sideband_rates,
                      steady_state_phonon, temperature_to_phonon)
from .thermometry import (AtomState, RecaptureCurve, TemperatureEstimate,
                          infer_temperature, recapture_curve,
                          release_recapture_trial, sample_thermal_state)
from .fit import (ExpFit, FanoFit, fit_exponential, fit_fano, least_squares,
                  simulate_photon_counts)

__all__ = [name for name in dir() if not name.startswith("_")]
