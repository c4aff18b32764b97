"""The four numerical experiments: ramp adiabaticity, bath equilibration,
Otto engine cycles, and the step-size convergence benchmark.

Shared conventions: the working mode ("gas") couples to freshly prepared
thermal baths through a Gaussian barrier; strokes change the stiffness alpha
between 0 (expanded, frequency 1) and omega^2 - 1 (compressed, frequency
omega).  Bath contacts use exact propagators; strokes use the fixed-step RK5
integrator at the step rule's divisor 5 unless stated otherwise.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fock import (
    DensityOperator,
    FockBasis,
    InvariantViolation,
    Temperature,
    energy,
    tensor_product,
    thermal_state,
    trace_distance,
)
from .hamiltonians import CouplingSpec, StiffnessSchedule, coupled_hamiltonian, gas_hamiltonian
from .propagators import (
    Propagator,
    StepRule,
    exact_propagator,
    integrate_gas_ramp,
    rk5_propagator,
    step_size,
    unitarity_defect,
)

# RK5 amplitude drift at divisor 5 lives at the top of the spectrum
# (~N * theta_top^6 / 1800, see propagators); budgets below leave ~5x headroom
# over the worst configuration each protocol runs.
ENGINE_STROKE_DEFECT_BUDGET = 1e-2
SWEEP_DEFECT_BUDGET = 5e-2
# Cumulative stroke-level trace loss over a 50-cycle engine run stays below
# ~1e-6; stricter bounds are unattainable without re-unitarizing.
ENGINE_TRACE_BUDGET = 1e-6


# --------------------------------------------------------------------------
# adiabaticity

def adiabaticity_ratio(omega: float, tau_alpha: float, temperature: Temperature,
                       basis: FockBasis, direction: str = "compression",
                       divisor: int = 5) -> float:
    """Ratio of the finite-time final energy to the adiabatic reference.

    The reference transports the initial thermal populations level by level
    onto the final spectrum: E_A = sum_n eps_n(H_f) p_n with both sorted
    ascending.  For any unitary stroke E_final >= E_A (trace inequality), so
    the ratio is >= 1, reaching 1 in the slow limit and growing with ramp
    speed; at omega = 1 the Hamiltonian never changes and the ratio is 1.
    """
    if omega < 1.0:
        raise ValueError(f"omega must be >= 1, got {omega!r}")
    if direction not in ("compression", "expansion"):
        raise ValueError(f"direction must be 'compression' or 'expansion', got {direction!r}")
    alpha_max = omega * omega - 1.0
    alpha_from, alpha_to = (0.0, alpha_max) if direction == "compression" else (alpha_max, 0.0)

    h_initial = gas_hamiltonian(basis, alpha_from)
    h_final = gas_hamiltonian(basis, alpha_to)
    eps_initial, vectors = np.linalg.eigh(h_initial)
    populations = np.exp(-(eps_initial - eps_initial[0]) / temperature.omega_T)
    populations /= populations.sum()
    eps_final = np.linalg.eigvalsh(h_final)
    e_adiabatic = float(eps_final @ populations)

    rho_initial = (vectors * populations) @ vectors.T
    stroke = rk5_propagator(StiffnessSchedule(alpha_from, alpha_to, tau_alpha), basis,
                            StepRule(basis.n_levels, alpha_max, divisor),
                            defect_tolerance=SWEEP_DEFECT_BUDGET)
    e_final = energy(stroke.apply(rho_initial), h_final)
    return e_final / e_adiabatic


@dataclass(frozen=True)
class SweepCell:
    omega: float
    tau_alpha: float
    omega_T: float
    direction: str
    ratio: float


def _sweep_cell(args) -> float:
    omega, tau_alpha, omega_T, n_levels, direction, divisor = args
    return adiabaticity_ratio(omega, tau_alpha, Temperature(omega_T),
                              FockBasis(n_levels), direction, divisor)


def run_adiabaticity_sweep(omega_grid, tau_grid, temperatures, basis: FockBasis,
                           divisor: int = 5, n_workers: int = 1) -> list[SweepCell]:
    """Ratio over the (direction, omega_T, omega, tau_alpha) grid, row-major."""
    grid = [(float(om), float(ta), float(wt), basis.n_levels, direction, divisor)
            for direction in ("compression", "expansion")
            for wt in temperatures
            for om in omega_grid
            for ta in tau_grid]
    ratios = _parallel_map(_sweep_cell, grid, n_workers)
    return [SweepCell(om, ta, wt, direction, ratio)
            for (om, ta, wt, _, direction, _), ratio in zip(grid, ratios)]


# --------------------------------------------------------------------------
# bath contacts (shared by equilibration and the engine)

_contact_cache: OrderedDict = OrderedDict()
_CONTACT_CACHE_MAX = 8


def _contact_eigensystem(n_levels: int, alpha: float, coupling: CouplingSpec):
    key = (n_levels, alpha, coupling.phi0, coupling.sigma, coupling.x0)
    if key not in _contact_cache:
        h = coupled_hamiltonian(FockBasis(n_levels), alpha, coupling)
        _contact_cache[key] = np.linalg.eigh(h)
        while len(_contact_cache) > _CONTACT_CACHE_MAX:
            _contact_cache.popitem(last=False)
    else:
        _contact_cache.move_to_end(key)
    return _contact_cache[key]


def _contact_propagator(basis: FockBasis, alpha: float, coupling: CouplingSpec,
                        dtau: float) -> Propagator:
    """Exact two-mode propagator exp(-2 pi i H_contact dtau), eigh cached."""
    energies, vectors = _contact_eigensystem(basis.n_levels, alpha, coupling)
    phases = np.exp(-2j * np.pi * energies * dtau)
    u = (vectors * phases) @ vectors.T
    defect = unitarity_defect(u)
    if defect > 1e-8:
        raise InvariantViolation(f"contact propagator defect {defect:.3e} exceeds 1e-8")
    return Propagator(u, dtau, defect)


def _ptrace_bath(matrix: np.ndarray, n: int) -> np.ndarray:
    return np.einsum('abcb->ac', matrix.reshape(n, n, n, n))


# --------------------------------------------------------------------------
# equilibration

@dataclass(frozen=True)
class BathSegment:
    """A run of n_baths consecutive fresh baths at a common coupling strength,
    each contact lasting n_steps applications of the exact dtau propagator."""

    phi0: float
    n_baths: int
    n_steps: int = 10
    dtau: float = 5.0

    def __post_init__(self):
        if not isinstance(self.n_baths, int) or self.n_baths < 1:
            raise ValueError(f"n_baths must be a positive integer, got {self.n_baths!r}")
        if not isinstance(self.n_steps, int) or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        if not self.dtau > 0:
            raise ValueError(f"dtau must be > 0, got {self.dtau!r}")


# progressively weaker couplings polish off the residual distance
DEFAULT_BATH_SEGMENTS = (BathSegment(1.0, 5), BathSegment(0.2, 4), BathSegment(0.05, 3))


@dataclass(frozen=True)
class BathSequenceConfig:
    alpha: float
    omega_T_gas: Temperature
    omega_T_bath: Temperature
    segments: tuple[BathSegment, ...] = DEFAULT_BATH_SEGMENTS
    n_levels: int = 41
    sigma: float = 1.0
    x0: float = 1.0

    def __post_init__(self):
        if self.alpha <= -1.0:
            raise ValueError("need alpha > -1")
        if not self.segments:
            raise ValueError("need at least one bath segment")


@dataclass(frozen=True)
class ContactRecord:
    """Gas-bath trace distance at time tau (step 0 marks a fresh contact)."""

    tau: float
    trace_distance: float
    bath_index: int
    step: int
    phi0: float


@dataclass(frozen=True)
class EquilibrationResult:
    records: list
    final_state: np.ndarray      # reduced gas state after the last contact


def run_equilibration(config: BathSequenceConfig) -> list[ContactRecord]:
    return run_equilibration_detailed(config).records


def run_equilibration_detailed(config: BathSequenceConfig) -> EquilibrationResult:
    """Sequential fresh-bath contacts; the gas keeps its reduced state throughout.

    Each contact applies the exact coupled propagator steps_per_bath times,
    recording D(tr_b[rho_total], rho_bath) after every application and once at
    contact start.  Total two-mode energy is conserved within each contact
    (unitary evolution); the bath is traced out and replaced afterwards.
    """
    basis = FockBasis(config.n_levels)
    n = config.n_levels
    h_single = gas_hamiltonian(basis, config.alpha)
    rho_gas = thermal_state(basis, config.omega_T_gas, h_single).matrix
    rho_bath = thermal_state(basis, config.omega_T_bath, h_single).matrix

    records = []
    tau = 0.0
    bath_index = 0
    for segment in config.segments:
        coupling = CouplingSpec(segment.phi0, config.sigma, config.x0)
        u = _contact_propagator(basis, config.alpha, coupling, segment.dtau)
        for _ in range(segment.n_baths):
            bath_index += 1
            records.append(ContactRecord(tau, trace_distance(rho_gas, rho_bath),
                                         bath_index, 0, segment.phi0))
            total = tensor_product(rho_gas, rho_bath)
            for step_i in range(1, segment.n_steps + 1):
                total = u.apply(total)
                tau += segment.dtau
                rho_gas = _ptrace_bath(total, n)
                records.append(ContactRecord(tau, trace_distance(rho_gas, rho_bath),
                                             bath_index, step_i, segment.phi0))
            # re-validate at the contact boundary before the bath is replaced
            DensityOperator(rho_gas, basis, 1)
    return EquilibrationResult(records, rho_gas)


def thermal_distance_scan(rho_final, alpha: float, omega_T_grid, basis: FockBasis) -> list[tuple[float, float]]:
    """D(rho_final, thermal(alpha, omega_T)) over a temperature grid."""
    h = gas_hamiltonian(basis, alpha)
    return [(float(wt), trace_distance(rho_final, thermal_state(basis, Temperature(float(wt)), h)))
            for wt in omega_T_grid]


# --------------------------------------------------------------------------
# engine

@dataclass(frozen=True)
class EngineConfig:
    omega: float
    tau_stroke: float
    tau_contact: float
    omega_T_hot: Temperature
    omega_T_cold: Temperature
    n_levels: int = 41
    phi0: float = 1.0
    sigma: float = 1.0
    x0: float = 1.0
    n_cycles: int = 50

    def __post_init__(self):
        if self.omega < 1.0:
            raise ValueError(f"omega must be >= 1 (stiffness bound), got {self.omega!r}")
        if not (self.tau_stroke > 0 and self.tau_contact > 0):
            raise ValueError("stroke and contact durations must be > 0")
        if not isinstance(self.n_cycles, int) or self.n_cycles < 1:
            raise ValueError(f"n_cycles must be a positive integer, got {self.n_cycles!r}")

    @property
    def alpha_max(self) -> float:
        return self.omega * self.omega - 1.0

    @property
    def cycle_period(self) -> float:
        return 2.0 * self.tau_stroke + 2.0 * self.tau_contact


@dataclass(frozen=True)
class CycleRecord:
    """Stroke-end energies and cycle thermodynamics, in cycle-stage order:
    expanded cold -> compressed cold -> compressed hot -> expanded hot."""

    cycle: int
    e_expanded_cold: float
    e_compressed_cold: float
    e_compressed_hot: float
    e_expanded_hot: float
    work: float
    heat_in: float
    efficiency: float
    power: float


@dataclass(frozen=True)
class EngineDiagnostics:
    records: list
    state_changes: list          # D(cycle-start state, next cycle-start state)
    stroke_defect: float
    contact_defects: tuple
    max_trace_error: float       # worst |tr rho - 1| seen at any stroke end


def run_engine(config: EngineConfig) -> list[CycleRecord]:
    """Otto cycles from the inside out: compress, hot contact, expand, cold contact."""
    return run_engine_detailed(config).records


def run_engine_detailed(config: EngineConfig) -> EngineDiagnostics:
    basis = FockBasis(config.n_levels)
    n = config.n_levels
    alpha_max = config.alpha_max
    coupling = CouplingSpec(config.phi0, config.sigma, config.x0)

    h_expanded = gas_hamiltonian(basis, 0.0)
    h_compressed = gas_hamiltonian(basis, alpha_max)
    rho_hot_feed = thermal_state(basis, config.omega_T_hot, h_compressed).matrix
    rho_cold_feed = thermal_state(basis, config.omega_T_cold, h_expanded).matrix

    stroke = rk5_propagator(StiffnessSchedule(0.0, alpha_max, config.tau_stroke), basis,
                            StepRule(n, alpha_max),
                            defect_tolerance=ENGINE_STROKE_DEFECT_BUDGET)
    hot_contact = _contact_propagator(basis, alpha_max, coupling, config.tau_contact)
    cold_contact = _contact_propagator(basis, 0.0, coupling, config.tau_contact)

    rho = rho_cold_feed.copy()          # start expanded, thermal at the cold temperature
    records = []
    state_changes = []
    max_trace_error = 0.0

    def checked(matrix, cycle, stage):
        nonlocal max_trace_error
        max_trace_error = max(max_trace_error, abs(matrix.trace().real - 1.0))
        try:
            DensityOperator(matrix, basis, 1, trace_tol=ENGINE_TRACE_BUDGET)
        except InvariantViolation as err:
            raise InvariantViolation(f"cycle {cycle}, after {stage}: {err}") from err
        return matrix

    for cycle in range(1, config.n_cycles + 1):
        start = rho
        e_expanded_cold = energy(rho, h_expanded)

        rho = checked(stroke.apply(rho), cycle, "compression")
        e_compressed_cold = energy(rho, h_compressed)

        total = hot_contact.apply(tensor_product(rho, rho_hot_feed))
        rho = checked(_ptrace_bath(total, n), cycle, "hot contact")
        e_compressed_hot = energy(rho, h_compressed)

        rho = checked(stroke.apply_reversed(rho), cycle, "expansion")
        e_expanded_hot = energy(rho, h_expanded)

        total = cold_contact.apply(tensor_product(rho, rho_cold_feed))
        rho = checked(_ptrace_bath(total, n), cycle, "cold contact")

        work = -((e_expanded_hot - e_compressed_hot) + (e_compressed_cold - e_expanded_cold))
        heat_in = e_compressed_hot - e_compressed_cold
        records.append(CycleRecord(cycle, e_expanded_cold, e_compressed_cold,
                                   e_compressed_hot, e_expanded_hot, work, heat_in,
                                   work / heat_in, work / config.cycle_period))
        state_changes.append(trace_distance(start, rho))

    return EngineDiagnostics(records, state_changes, stroke.unitarity_defect,
                             (hot_contact.unitarity_defect, cold_contact.unitarity_defect),
                             max_trace_error)


def steady_state_metrics(records, tail: int = 10) -> dict:
    """Mean work, heat intake, efficiency and power over the last `tail` cycles."""
    last = records[-tail:]
    return {
        "work": float(np.mean([r.work for r in last])),
        "heat_in": float(np.mean([r.heat_in for r in last])),
        "efficiency": float(np.mean([r.efficiency for r in last])),
        "power": float(np.mean([r.power for r in last])),
        "cycles_averaged": len(last),
    }


# --------------------------------------------------------------------------
# step-size convergence benchmark

@dataclass(frozen=True)
class BenchmarkRow:
    mode: str          # "fixed" (alpha set at tau = 0+) or "ramped" (linear to target)
    alpha: float
    divisor: int
    error: float       # trace distance to the finest-step final state


def _benchmark_final_state(args) -> np.ndarray:
    n_levels, omega_T, alpha, mode, tau_final, divisor = args
    basis = FockBasis(n_levels)
    rho0 = thermal_state(basis, Temperature(omega_T), gas_hamiltonian(basis, 0.0)).matrix
    n_steps, h = _benchmark_steps(n_levels, alpha, tau_final, divisor)
    if mode == "fixed":
        # constant H: the one-step operator repeats, so compose by powering
        one_step = integrate_gas_ramp(basis, alpha, alpha, h, 1)
        u = np.linalg.matrix_power(one_step, n_steps)
    else:
        u = integrate_gas_ramp(basis, 0.0, alpha, h, n_steps)
    return u @ rho0 @ u.conj().T


def _benchmark_steps(n_levels: int, alpha: float, tau_final: float, divisor: int):
    nominal = step_size(StepRule(n_levels, alpha, divisor))
    n_steps = max(1, math.ceil(tau_final / nominal - 1e-12))
    return n_steps, tau_final / n_steps


def run_benchmark(n_levels: int = 101, omega_T: Temperature = Temperature(5.0),
                  alpha_targets=(3.0, 8.0), tau_final: float = 5.0,
                  divisor_range=(3, 4, 5, 6, 7, 8, 10, 12, 14, 16, 32),
                  n_workers: int = 1) -> list[BenchmarkRow]:
    """Final-state error vs step size for fixed and ramped stiffness.

    The largest divisor is the reference; its own error row is exactly 0.
    Coarse divisors intentionally probe the unconverged regime, so this runs
    the integrator core directly instead of the defect-gated factory.
    """
    divisors = sorted({int(d) for d in divisor_range})
    if divisors[0] > 3 or divisors[-1] < 16:
        raise ValueError(f"divisor_range must span at least [3, 16], got {divisors}")
    jobs = [(n_levels, omega_T.omega_T, float(alpha), mode, float(tau_final), d)
            for alpha in alpha_targets
            for mode in ("fixed", "ramped")
            for d in divisors]
    finals = _parallel_map(_benchmark_final_state, jobs, n_workers)

    rows = []
    per_case = len(divisors)
    for case_start in range(0, len(jobs), per_case):
        _, _, alpha, mode, _, _ = jobs[case_start]
        reference = finals[case_start + per_case - 1]
        for offset in range(per_case):
            rows.append(BenchmarkRow(mode, alpha, divisors[offset],
                                     trace_distance(finals[case_start + offset], reference)))
    return rows


def benchmark_slope(rows, mode: str, alpha: float, fit_range=(3, 16),
                    n_levels: int = 101, tau_final: float = 5.0) -> float:
    """Log-log slope of error vs actual step size over divisors in fit_range."""
    pts = [(r.divisor, r.error) for r in rows
           if r.mode == mode and r.alpha == alpha
           and fit_range[0] <= r.divisor <= fit_range[1] and r.error > 0]
    if len(pts) < 2:
        raise ValueError("need at least two nonzero-error rows inside fit_range")
    log_h = [math.log(_benchmark_steps(n_levels, alpha, tau_final, d)[1]) for d, _ in pts]
    log_e = [math.log(e) for _, e in pts]
    return float(np.polyfit(log_h, log_e, 1)[0])


# --------------------------------------------------------------------------

def _parallel_map(fn, items, n_workers: int):
    if n_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, items, chunksize=1))
