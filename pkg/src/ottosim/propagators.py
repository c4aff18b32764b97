"""Time-evolution operators: exact exponentials and fixed-step RK5 ramps.

The step rule ties the RK5 step to the largest Hamiltonian scale in play:
eps = [2 pi n_max (1 + alpha_max/2)]^-1 is roughly one radian of phase for
the topmost level, and integration runs at delta_tau = eps / divisor.

Unitarity is monitored, never repaired.  A fixed-step RK5 solution loses
amplitude in mode frequency theta = 2 pi E delta_tau at a rate of about
theta^6/1800 per step, which concentrates at the (unoccupied) top of the
spectrum; callers evolving states with support there must budget for it via
``defect_tolerance``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._dp5 import dp5_gas_ramp
from .fock import FockBasis, InvariantViolation
from .hamiltonians import StiffnessSchedule

EXACT_DEFECT_TOL = 1e-8


@dataclass(frozen=True)
class StepRule:
    """Step-size prescription: basis size, worst stiffness, and subdivision."""

    n_max: int
    alpha_max: float
    divisor: int = 5

    def __post_init__(self):
        if not isinstance(self.n_max, int) or self.n_max < 2:
            raise ValueError(f"n_max must be an integer >= 2, got {self.n_max!r}")
        if self.alpha_max < 0:
            raise ValueError(f"alpha_max must be >= 0, got {self.alpha_max!r}")
        if not isinstance(self.divisor, int) or self.divisor < 1:
            raise ValueError(f"divisor must be a positive integer, got {self.divisor!r}")


def step_size(rule: StepRule) -> float:
    """delta_tau = eps / divisor with eps = [2 pi n_max (1 + alpha_max/2)]^-1."""
    eps = 1.0 / (2.0 * np.pi * rule.n_max * (1.0 + 0.5 * rule.alpha_max))
    return eps / rule.divisor


@dataclass(frozen=True)
class Propagator:
    """Evolution operator over a stated duration, with its measured defect.

    Construct through ``exact_propagator`` / ``rk5_propagator``; they measure
    max |U^+ U - 1| and enforce the appropriate bound.
    """

    matrix: np.ndarray
    duration: float
    unitarity_defect: float

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """U rho U^+ (forward conjugation)."""
        return self.matrix @ rho @ self.matrix.conj().T

    def apply_reversed(self, rho: np.ndarray) -> np.ndarray:
        """U^+ rho U (the stroke run backwards)."""
        return self.matrix.conj().T @ rho @ self.matrix


def unitarity_defect(u: np.ndarray) -> float:
    n = u.shape[0]
    return float(np.abs(u.conj().T @ u - np.eye(n)).max())


def exact_propagator(hamiltonian: np.ndarray, dtau: float) -> Propagator:
    """U = exp(-2 pi i H dtau) by eigendecomposition; unitary to 1e-8 or it raises."""
    h = np.asarray(hamiltonian)
    scale = max(1.0, np.abs(h).max())
    if np.abs(h - h.conj().T).max() > 1e-10 * scale:
        raise ValueError("exact_propagator needs a Hermitian Hamiltonian")
    if dtau < 0:
        raise ValueError(f"dtau must be >= 0, got {dtau!r}")
    energies, vectors = np.linalg.eigh(h)
    phases = np.exp(-2j * np.pi * energies * dtau)
    u = (vectors * phases) @ vectors.conj().T
    defect = unitarity_defect(u)
    if defect > EXACT_DEFECT_TOL:
        raise InvariantViolation(f"exact propagator defect {defect:.3e} exceeds {EXACT_DEFECT_TOL:.1e}")
    return Propagator(u, dtau, defect)


def gas_stencil(basis: FockBasis) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and second-off-diagonal coefficient vectors of H(alpha)."""
    levels = np.arange(basis.n_levels, dtype=float)
    return levels + 0.5, np.sqrt((levels + 1.0) * (levels + 2.0))


def integrate_gas_ramp(basis: FockBasis, alpha_from: float, alpha_to: float,
                       h: float, n_steps: int) -> np.ndarray:
    """Raw fixed-step DP5 sweep; h may be negative for reverse-time runs."""
    diag_base, offd_base = gas_stencil(basis)
    u = np.eye(basis.n_levels, dtype=np.complex128)
    dp5_gas_ramp(diag_base, offd_base, alpha_from, alpha_to - alpha_from, h, n_steps, u)
    return u


def rk5_propagator(schedule: StiffnessSchedule, basis: FockBasis, step: StepRule,
                   *, defect_tolerance: float = 1e-6) -> Propagator:
    """Time-ordered evolution over a linear stiffness ramp of the gas mode.

    The nominal step from the rule is shrunk so an integer number of steps
    lands exactly on tau_alpha.  If the measured unitarity defect exceeds
    ``defect_tolerance`` the construction aborts: raise the rule's divisor
    (smaller steps) or widen the budget if the evolved states provably do not
    occupy the drifting top of the spectrum.
    """
    nominal = step_size(step)
    n_steps = max(1, math.ceil(schedule.tau_alpha / nominal - 1e-12))
    h = schedule.tau_alpha / n_steps
    u = integrate_gas_ramp(basis, schedule.alpha_start, schedule.alpha_end, h, n_steps)
    defect = unitarity_defect(u)
    if defect > defect_tolerance:
        raise InvariantViolation(
            f"RK5 propagator defect {defect:.3e} exceeds budget {defect_tolerance:.1e} "
            f"(divisor {step.divisor}, {n_steps} steps of {h:.3e}); increase the divisor")
    return Propagator(u, schedule.tau_alpha, defect)
