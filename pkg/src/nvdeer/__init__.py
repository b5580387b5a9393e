"""Sensor-spin DEER simulation toolkit.

Dipolar-coupling geometry, single-spin and ensemble DEER signals,
spin-Hamiltonian EPR spectra, chi-square field/orientation fitting, and
sensing-volume estimation for an optically read-out electron spin
sensing dilute target spins.

Unit conventions: ordinary frequencies in MHz, times in microseconds,
magnetic fields in Gauss, distances in nm.
"""

from .constants import CODATA, ConstantsTable, MU_B_MHZ_PER_G, MU_N_MHZ_PER_G
from .geometry import (DipolarCoupling, SphericalDirection, coupling_prefactor,
                       dipolar_coupling, rotate_axis_angle, rotation_matrix,
                       unit_vector)
from .deer_single import (DeerSignal, DrivePulse, EchoConfig, QuadratureSpec,
                          accumulated_phase, deer_rabi, deer_signal_montecarlo,
                          deer_signal_quadrature, deer_spectrum, revival_detuning)
from .deer_ensemble import (SpinBathSample, ensemble_signal,
                            ensemble_signal_montecarlo, ensemble_variance)
from .linalg import jacobi_eigh
from .hamiltonian import (PRESETS, FieldConfig, SpectrumResult, SpinSystem,
                          build_hamiltonian, build_hamiltonians, eigen_solve,
                          get_preset, spin_operators, transition_spectrum)
from .fitting import (AxisInterval, FitGrid, FitMinimum, LineshapeFit,
                      LineshapeModel, ObservedPeaks, chi2_surface, fit_lineshape,
                      lorentzian_profile, sinc_squared_profile,
                      uncertainty_intervals)
from .sensing import (SampleGeometry, SensingModel, SensingRadius,
                      accumulate_nc2, density_estimate, detectability_radius,
                      halfspace_nc2_analytic, kappa_constant, prefactor_at,
                      threshold_depth)

__version__ = "0.1.0"

__all__ = [
    "CODATA", "ConstantsTable", "MU_B_MHZ_PER_G", "MU_N_MHZ_PER_G",
    "DipolarCoupling", "SphericalDirection", "coupling_prefactor",
    "dipolar_coupling", "rotate_axis_angle", "rotation_matrix", "unit_vector",
    "DeerSignal", "DrivePulse", "EchoConfig", "QuadratureSpec",
    "accumulated_phase", "deer_rabi", "deer_signal_montecarlo",
    "deer_signal_quadrature", "deer_spectrum", "revival_detuning",
    "SpinBathSample", "ensemble_signal", "ensemble_signal_montecarlo",
    "ensemble_variance",
    "jacobi_eigh",
    "PRESETS", "FieldConfig", "SpectrumResult", "SpinSystem",
    "build_hamiltonian", "build_hamiltonians", "eigen_solve", "get_preset",
    "spin_operators", "transition_spectrum",
    "AxisInterval", "FitGrid", "FitMinimum", "LineshapeFit", "LineshapeModel",
    "ObservedPeaks", "chi2_surface", "fit_lineshape", "lorentzian_profile",
    "sinc_squared_profile", "uncertainty_intervals",
    "SampleGeometry", "SensingModel", "SensingRadius", "accumulate_nc2",
    "density_estimate", "detectability_radius", "halfspace_nc2_analytic",
    "kappa_constant", "prefactor_at", "threshold_depth",
]
