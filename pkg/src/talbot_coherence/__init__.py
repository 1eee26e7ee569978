"""Temporal Talbot interferometry of lattice matter waves: revival signals, oracles, and coherence extraction."""

__version__ = "0.1.0"

from ._validation import DomainError
from .analytic import (
    CorrelatorProfile,
    OverlapValue,
    PhaseConfiguration,
    averaged_overlap_antirevival,
    averaged_overlap_exact,
    averaged_overlap_from_weights,
    averaged_overlap_revival,
    density_overlap,
    leading_order_overlap,
    momentum_wavefunction,
    overlap_upper_bound,
    position_wavefunction,
    site_wavefunction,
    weight_even,
    weight_even_dual,
    weight_odd,
    weight_odd_dual,
)
from .disorder import (
    DisorderModel,
    closed_form_correlator,
    correlator_profile_for_quench,
    sample_phases,
)
from .lattice import (
    LatticeParams,
    gaussian_width_from_depth,
    recoil_energy,
    talbot_length,
    talbot_time,
)
from .oracle import monte_carlo_average, overlap_by_quadrature, propagate_free
from .quench import (
    INFINITE_COHERENCE,
    DampedSineRegressor,
    FitError,
    FitResult,
    NoOscillationError,
    PowerLawRegressor,
    QuenchSeries,
    TalbotSignal,
    coherence_correction,
    fit_damped_sine,
    fit_power_law,
    interaction_decay_estimate,
    synthesize_signal,
    transport_bounds,
    xi_from_decay,
)
