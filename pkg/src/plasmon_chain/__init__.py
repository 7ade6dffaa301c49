"""Quantum plasmonic transfer through a lossy metal-nanoparticle chain.

Modules: ``materials`` (permittivity and chain parameters), ``scattering``
(input-output coefficients), ``dispersion`` (effective wavenumber and group
velocity), ``fidelity`` (state-transfer figures of merit), ``interference``
(two-plasmon probabilities), ``nanowire`` (wire and interface SPP
dispersion) and ``cli``.
"""

__version__ = "0.1.0"

from .errors import (BesselRangeError, InvalidInputError, ModeNotBoundError,
                     NumericalFailureError, PlasmonChainError, SingularityError,
                     UnimodalityWarning, WeakCouplingWarning)
from .materials import (OMEGA_0_DEFAULT, MaterialGeometry, MaterialPreset, PermittivityModel,
                        PhysicalConstants, Polarization, coupling_strength, damping_rate,
                        frohlich_frequency, interaction_frequency, load_preset,
                        near_field_ok, permittivity, preset_names, weak_coupling_ok)
from .scattering import (ChainConfig, ScatteringCoefficients, Spectrum,
                         classical_mean_field_evolution, closed_form_transmission,
                         solve_scattering, transmission_peaks, transmission_spectrum)
from .dispersion import (DispersionCurve, effective_wavenumber, group_velocity,
                         infinite_chain_dispersion, linear_dispersion_bandwidth,
                         resonance_frequencies, scaled_group_velocity)
from .fidelity import (CLASSICAL_THRESHOLD, FidelityMap, GaussianWavepacket,
                       OutputQubitDensity, QubitState, average_fidelity, coherent_fidelity,
                       delayed_wavepacket, fidelity_contours, fidelity_map, gaussian_amplitude,
                       mean_output_flux, output_density_matrix, qubit_fidelity,
                       single_photon_fidelity)
from .interference import (JointAmplitude, TwoPlasmonProbabilities, balance_coupling,
                           joint_probabilities_exact, joint_probabilities_flat, loss_sweep,
                           minimize_one_plasmon_loss, overlap_integral)
from .nanowire import (WireGeometry, flat_interface_spp, modified_bessel, photon_line,
                       wire_dispersion, wire_effective_index)
