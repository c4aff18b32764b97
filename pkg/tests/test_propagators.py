import numpy as np
import pytest

from ottosim import (
    FockBasis,
    InvariantViolation,
    StepRule,
    StiffnessSchedule,
    exact_propagator,
    gas_hamiltonian,
    rk5_propagator,
    step_size,
)
from ottosim.propagators import integrate_gas_ramp, unitarity_defect


def test_step_rule_validation():
    StepRule(41, 3.0)
    with pytest.raises(ValueError):
        StepRule(1, 3.0)
    with pytest.raises(ValueError):
        StepRule(41, -0.5)
    with pytest.raises(ValueError):
        StepRule(41, 3.0, 0)


def test_step_size_formula():
    rule = StepRule(41, 3.0, 5)
    expected = 1.0 / (2.0 * np.pi * 41 * 2.5) / 5
    assert step_size(rule) == pytest.approx(expected, rel=1e-15)


def test_exact_propagator_diagonal_oracle():
    h = np.diag([0.5, 1.5, 2.5])
    u = exact_propagator(h, 0.73)
    oracle = np.diag(np.exp(-2j * np.pi * np.array([0.5, 1.5, 2.5]) * 0.73))
    assert np.abs(u.matrix - oracle).max() < 1e-14
    assert u.duration == 0.73
    assert u.unitarity_defect <= 1e-8


def test_exact_propagator_two_level_rotation():
    # H = sx flips |0> <-> |1> completely at 2 pi tau = pi
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    u = exact_propagator(sx, 0.25)
    rho = np.diag([1.0, 0.0]).astype(complex)
    flipped = u.apply(rho)
    assert abs(flipped[1, 1] - 1.0) < 1e-12


def test_exact_propagator_input_validation():
    with pytest.raises(ValueError):
        exact_propagator(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)
    with pytest.raises(ValueError):
        exact_propagator(np.eye(2), -1.0)


def test_apply_and_apply_reversed_are_inverses():
    h = gas_hamiltonian(FockBasis(10), 2.0)
    u = exact_propagator(h, 1.37)
    rng = np.random.default_rng(5)
    g = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    rho = g @ g.conj().T
    rho /= rho.trace()
    back = u.apply_reversed(u.apply(rho))
    assert np.abs(back - rho).max() < 1e-12


def test_rk5_matches_exact_for_constant_stiffness():
    # constant-alpha ramp against the eigendecomposition exponential
    basis = FockBasis(21)
    alpha, tau = 3.0, 1.0
    exact = exact_propagator(gas_hamiltonian(basis, alpha), tau).matrix
    approx = rk5_propagator(StiffnessSchedule(alpha, alpha, tau), basis,
                            StepRule(21, alpha, 16)).matrix
    assert np.abs(approx - exact).max() < 1e-6


def test_rk5_step_count_lands_exactly_on_duration():
    basis = FockBasis(8)
    rule = StepRule(8, 1.0, 5)
    nominal = step_size(rule)
    for tau in (nominal * 3, nominal * 3.5, 0.77):
        p = rk5_propagator(StiffnessSchedule(0.0, 1.0, tau), basis, rule,
                           defect_tolerance=1e-3)
        assert p.duration == tau


def test_rk5_defect_gate_names_the_remedy():
    basis = FockBasis(41)
    with pytest.raises(InvariantViolation, match="increase the divisor"):
        rk5_propagator(StiffnessSchedule(0.0, 8.0, 4.0), basis,
                       StepRule(41, 8.0, 1), defect_tolerance=1e-6)


def test_rk5_defect_shrinks_fifth_order_with_divisor():
    # doubling the divisor should cut the accumulated defect by ~2^5 (the
    # number of steps doubles while the per-step defect drops 2^6)
    basis = FockBasis(15)
    sched = StiffnessSchedule(0.0, 3.0, 0.5)
    d1 = rk5_propagator(sched, basis, StepRule(15, 3.0, 4), defect_tolerance=1.0).unitarity_defect
    d2 = rk5_propagator(sched, basis, StepRule(15, 3.0, 8), defect_tolerance=1.0).unitarity_defect
    assert 16 < d1 / d2 < 64


def test_reverse_time_integration_undoes_the_ramp():
    # integrating the same schedule with negated step sizes approximates the
    # adjoint, so the round trip composes to the identity up to the defect scale
    basis = FockBasis(15)
    rule = StepRule(15, 3.0, 6)
    nominal = step_size(rule)
    rng = np.random.default_rng(17)
    for _ in range(5):
        alpha_to = float(rng.uniform(0.5, 3.0))
        n_steps = int(rng.integers(50, 200))
        h = nominal * float(rng.uniform(0.5, 1.0))
        fwd = integrate_gas_ramp(basis, 0.0, alpha_to, h, n_steps)
        # walk the ramp backwards: swapped endpoints, negative h
        back = integrate_gas_ramp(basis, alpha_to, 0.0, -h, n_steps)
        defect = max(unitarity_defect(fwd), 1e-15)
        round_trip = np.abs(back @ fwd - np.eye(15)).max()
        assert round_trip < 50 * defect


def test_unitarity_defect_zero_for_permutation():
    perm = np.eye(4)[[2, 0, 3, 1]]
    assert unitarity_defect(perm) == 0.0
