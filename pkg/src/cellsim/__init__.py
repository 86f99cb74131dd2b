"""cellsim: EIT and slow-light simulator for paraffin-coated Rb vapor cells."""

__version__ = "0.1.0"

from .atomkit import (  # noqa: F401
    RB85, RB87, AtomSpecies, BeamConfig, doppler_hwhm, rabi_from_intensity,
    thermal_speed, vapor_density, zeeman_splitting,
)
from .coated_cell import (  # noqa: F401
    CellConfig, CoatedCellMedium, RepumpConfig, TransitStatistics,
    build_medium, dual_structure_spectrum, make_lambda_params,
    radiation_trapping_decoherence, repumper_effective_density,
    transit_linewidth, transmission_spectrum,
)
from .fitlab import (  # noqa: F401
    FitResult, fit_dual_lorentzian, fit_lorentzian, pulse_metrics,
)
from .lambda_solver import (  # noqa: F401
    DRParams, LambdaParams, Spectrum, TransitionSpec,
    double_resonance_spectrum, eit_fwhm, eit_spectrum, gradient_broadening,
    integrate_bloch, steady_state_susceptibility, susceptibility,
)
from .montecarlo import simulate_trajectories  # noqa: F401
from .pulsewave import (  # noqa: F401
    PropagationResult, Pulse, fractional_delay, fractional_reshaping,
    gaussian_pulse, group_velocity_curve, medium_transfer, propagate,
    transfer_function,
)
