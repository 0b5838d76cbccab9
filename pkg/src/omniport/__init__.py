"""Steady-state simulator for N cavities coupled to one shared mechanical mode."""

from .meanfield import (
    MeanFieldBranch,
    assess_stability,
    calibrate_drives,
    solve_mean_fields,
    to_linearized,
)
from .metrics import (
    RoutingReport,
    Scenario,
    SpectrumRecord,
    Transmission,
    fipb_check,
    max_mech_excitation,
    routing_report,
    spectrum,
)
from .model import (
    ConfigError,
    LinearPort,
    MechanicalMode,
    NetworkConfig,
    PhysicalPort,
    SignalSet,
    ValidationReport,
    validate,
)
from .response import (
    Control,
    ResponseState,
    closed_form_three_port,
    output_amplitude,
    output_amplitudes,
    solve_response,
    transmission_coefficient,
)

__version__ = "0.1.0"
