"""Quantum optomechanics of a membrane inside a Fabry-Perot cavity.

Layered API: `cavity_optics` (complex mode shifts of the membrane-loaded
cavity), `mode_coupling` (overlap factors and the vacuum coupling rate),
`operating_point` (classical steady states and linearization),
`gaussian_steady_state` (drift/diffusion, Lyapunov covariance, occupancy and
entanglement), `spectra` (frequency-domain diagnostics), `sde_oracle`
(stochastic cross-check), `cli_sweeps` (scenarios, sweeps, tabular output).
"""

from .cavity_optics import (CavityGeometry, ComplexShift, MembraneSlab,
                            ModeIndices, absorption_rate_kappa1,
                            empty_mode_frequency, frequency_shift,
                            frequency_shift_derivatives,
                            membrane_reflectivity, total_finesse)
from .errors import (BranchAmbiguityError, HeatingError, InvalidGeometryError,
                     PhysicsError, QuadratureError, ScenarioError,
                     SingularConfigurationError, SteadyStateError,
                     UnphysicalStateError, UnstableSystemError)
from .gaussian_steady_state import (CovarianceState, DiffusionMatrix,
                                    DriftMatrix, build_diffusion, build_drift,
                                    logarithmic_negativity, occupancy,
                                    solve_lyapunov, stability_conditions)
from .mode_coupling import (CouplingEntry, VibrationalMode,
                            longitudinal_factor_diagonal,
                            longitudinal_factor_general, mode_shape_phi,
                            transverse_overlap, vacuum_coupling_g,
                            vibrational_frequency)
from .operating_point import (DriveParams, OperatingPoint,
                              linearization_coefficients,
                              position_dependent_frequency, select_branch,
                              solve_steady_state, thermal_occupancy)
from .sde_oracle import (EmpiricalCovariance, SimulationConfig, noise_factor,
                         simulate)
from .spectra import (CoolingRates, SpectrumSample, approximate_occupancy,
                      effective_frequency_damping, effective_susceptibility,
                      noise_spectra, scattering_rates, spectrum_variances)

__version__ = "0.1.0"
