"""Complex-synapse chain simulator, device fitting, and memory benchmark."""

__version__ = "0.1.0"

from .chain import (
    ChainConfig,
    ChainState,
    DriveRule,
    LeakySynapse,
    Propagator,
    build_coupling_matrix,
    build_propagator,
    conserved_total,
    device_config,
    drive_strength,
    effective_weight,
    euler_oracle,
    evolve_driven,
    evolve_free,
    slowest_timescale,
    zero_state,
)
from .linalg import EigenDecomposition, eig_sym, top_components
from .protocol import (
    CycleReport,
    PulseSchedule,
    WeightTrace,
    apply_pulse_train,
    recover_to_baseline,
    recovery_fraction,
    run_cycle,
    run_relaxation,
    sample_u1_at,
)

__all__ = [
    "ChainConfig",
    "ChainState",
    "CycleReport",
    "DriveRule",
    "EigenDecomposition",
    "LeakySynapse",
    "Propagator",
    "PulseSchedule",
    "WeightTrace",
    "apply_pulse_train",
    "build_coupling_matrix",
    "build_propagator",
    "conserved_total",
    "device_config",
    "drive_strength",
    "effective_weight",
    "euler_oracle",
    "evolve_driven",
    "evolve_free",
    "eig_sym",
    "recover_to_baseline",
    "recovery_fraction",
    "run_cycle",
    "run_relaxation",
    "sample_u1_at",
    "slowest_timescale",
    "top_components",
    "zero_state",
]
