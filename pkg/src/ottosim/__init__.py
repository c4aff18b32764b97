"""Quantum Otto engine simulator on a truncated Fock basis."""

from .fock import (
    DensityOperator,
    FockBasis,
    InvariantViolation,
    Temperature,
    energy,
    ground_state,
    lowering_operator,
    oscillator_wavefunction,
    partial_trace_bath,
    position_operator,
    tensor_product,
    thermal_state,
    trace_distance,
)
from .hamiltonians import (
    CouplingSpec,
    StiffnessSchedule,
    coupled_hamiltonian,
    gas_hamiltonian,
    gaussian_coupling_matrix,
)
from .propagators import (
    Propagator,
    StepRule,
    exact_propagator,
    rk5_propagator,
    step_size,
)
from .protocols import (
    DEFAULT_BATH_SEGMENTS,
    BathSegment,
    BathSequenceConfig,
    BenchmarkRow,
    ContactRecord,
    CycleRecord,
    EngineConfig,
    EngineDiagnostics,
    EquilibrationResult,
    SweepCell,
    adiabaticity_ratio,
    benchmark_slope,
    run_adiabaticity_sweep,
    run_benchmark,
    run_engine,
    run_engine_detailed,
    run_equilibration,
    run_equilibration_detailed,
    steady_state_metrics,
    thermal_distance_scan,
)

__all__ = [name for name in dir() if not name.startswith("_")]
