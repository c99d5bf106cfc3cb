"""Terminal-descent guidance library: closed-form planar descent math, a
desired-velocity field with a tracking guidance law and glide-slope
avoidance, and a closed-loop 3-DOF simulator with a Monte Carlo
robustness harness.

Numeric kernels run compiled (numba) by default with a pure-NumPy
fallback; select with the GTLAND_NUMBA environment variable ("1"/"0")
before import.
"""

from ._accel import NUMBA_ENABLED, backend_name
from .errors import ConfigError, DomainError, GtlandError, RunFailure
from .gt_core import (
    GtTerminal,
    PlanarDescent,
    PlanarState,
    analytic_state_at,
    indefinite_integrals,
    integration_constant,
    planar_propagate,
    terminal_values,
)
from .guidance import (
    FrameContext,
    GuidanceConfig,
    GuidanceFrame,
    GuidanceOutput,
    LanderState,
    beta_profile,
    build_frame,
    desired_velocity,
    error_decay_closed_form,
    error_decay_rig,
    guidance_step,
    jacobians,
    tracking_acceleration,
    tracking_acceleration_chain,
    velocity_jacobian,
    with_overrides,
)
from .harness import (
    DispersionSpec,
    MonteCarloSummary,
    Scenario,
    SweepRow,
    downrange_sweep,
    load_dispersion,
    load_scenario,
    preset,
    run_monte_carlo,
)
from .sim import (
    DisturbanceModel,
    LanderParams,
    TerminationReport,
    TrajectoryLog,
    run_closed_loop,
    step_dynamics,
    zemzev_command,
    zemzev_time_to_go,
)
from .velocity_field import (
    VelocitySolution,
    h_slope,
    h_value,
    solve_field,
    solve_gamma,
    solve_vertical,
    time_to_go,
    time_to_go_on_field,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DisturbanceModel",
    "DispersionSpec",
    "DomainError",
    "FrameContext",
    "GtTerminal",
    "GtlandError",
    "GuidanceConfig",
    "GuidanceFrame",
    "GuidanceOutput",
    "LanderParams",
    "LanderState",
    "MonteCarloSummary",
    "NUMBA_ENABLED",
    "PlanarDescent",
    "PlanarState",
    "RunFailure",
    "Scenario",
    "SweepRow",
    "TerminationReport",
    "TrajectoryLog",
    "VelocitySolution",
    "analytic_state_at",
    "backend_name",
    "beta_profile",
    "build_frame",
    "desired_velocity",
    "downrange_sweep",
    "error_decay_closed_form",
    "error_decay_rig",
    "guidance_step",
    "h_slope",
    "h_value",
    "indefinite_integrals",
    "integration_constant",
    "jacobians",
    "load_dispersion",
    "load_scenario",
    "planar_propagate",
    "preset",
    "run_closed_loop",
    "run_monte_carlo",
    "solve_field",
    "solve_gamma",
    "solve_vertical",
    "step_dynamics",
    "terminal_values",
    "time_to_go",
    "time_to_go_on_field",
    "tracking_acceleration",
    "tracking_acceleration_chain",
    "velocity_jacobian",
    "with_overrides",
    "zemzev_command",
    "zemzev_time_to_go",
]
