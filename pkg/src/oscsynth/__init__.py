"""Pulse-schedule compiler and simulator for oscillator state preparation
via multiphoton qubit-oscillator exchange interactions."""

from .fockspace import (
    DimensionError,
    TruncatedSpace,
    WignerGrid,
    fidelity,
    ladder,
    ladder_power,
    displacement,
    squeezing,
    rotation,
    make_space,
    wigner,
)
from .gates import (
    DispersiveModel,
    PulseStep,
    drive_propagator,
    njc_propagator,
    selective_drive_frequency,
    selective_drive_propagator,
    xi,
)
from .synthesis import (
    CouplingBudget,
    PulseSchedule,
    apply_schedule,
    ftp_schedule,
    invert_symmetric,
    refine_schedule,
    schedule_duration,
    schedule_from_json,
    schedule_to_json,
)
from .targets import (
    SqueezingMetrics,
    TargetState,
    cat_state,
    effective_squeezing,
    gkp_zero,
    multimode_target,
    parse_target,
)
from .planner import (
    MultiPunchCard,
    PunchCard,
    base_step_count,
    multi_punch_card,
    punch_card,
    scaling_table,
    steps_arbitrary,
    time_ftp,
    time_ftp_two_oscillator,
    time_le,
    time_symmetric,
    time_two_oscillator,
    two_oscillator_plan,
)
from .multiosc import (
    TwoOscSchedule,
    annotate_frequencies,
    ftp_two_oscillator,
    invert_two_oscillator,
)
from .opensystem import (
    CircuitParams,
    IntegrationError,
    NoiseRates,
    hamiltonian_interaction_picture,
    lindblad_evolve,
    run_open_protocol,
    wigner_comparison,
)

__version__ = "0.1.0"
