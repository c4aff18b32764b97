"""Operators, states, and metrics on a truncated Fock basis.

Everything in this package lives in oscillator units: energies in units of
hbar*Omega, positions in units of the oscillator length, temperatures as
omega_T = k_B T / (hbar*Omega).

Composite (two-mode) objects follow a single ordering convention, fixed here
and nowhere else: the gas mode is the LEFT Kronecker factor (slowest-varying
index), the bath mode the RIGHT one.  ``tensor_product`` builds composites in
that order and ``partial_trace_bath`` undoes the right factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = -1e-10
ENERGY_IMAG_TOL = 1e-8


class InvariantViolation(RuntimeError):
    """A numerical invariant (hermiticity, trace, positivity, ...) failed."""


@dataclass(frozen=True)
class FockBasis:
    """Truncated single-mode Fock space keeping levels 0 .. n_levels-1."""

    n_levels: int

    def __post_init__(self):
        if not isinstance(self.n_levels, int) or self.n_levels < 2:
            raise ValueError(f"n_levels must be an integer >= 2, got {self.n_levels!r}")


@dataclass(frozen=True)
class Temperature:
    """Dimensionless temperature omega_T = k_B T / (hbar*Omega), strictly positive.

    The omega_T -> 0 limit is not representable here; use ``ground_state``.
    """

    omega_T: float

    def __post_init__(self):
        if not self.omega_T > 0:
            raise ValueError(f"omega_T must be > 0, got {self.omega_T!r}")


class DensityOperator:
    """Density matrix with invariants enforced at construction.

    Hermiticity, unit trace, and positive semidefiniteness are checked with
    tolerances that can be widened by long evolutions (see ``trace_tol``);
    eigenvalues are never clipped, a violation raises.

    ``check=False`` skips validation and exists for hot loops whose output is
    re-validated at the recording boundary.
    """

    __slots__ = ("matrix", "n_modes", "basis")

    def __init__(self, matrix: np.ndarray, basis: FockBasis, n_modes: int = 1,
                 *, trace_tol: float = TRACE_TOL, check: bool = True):
        matrix = np.asarray(matrix)
        dim = basis.n_levels ** n_modes
        if matrix.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix for {n_modes} mode(s) "
                             f"of {basis.n_levels} levels, got {matrix.shape}")
        if check:
            herm = np.abs(matrix - matrix.conj().T).max()
            if herm > HERMITICITY_TOL:
                raise InvariantViolation(f"density matrix not Hermitian: max |rho - rho^+| = {herm:.3e}")
            tr = matrix.trace()
            if abs(tr - 1.0) > trace_tol:
                raise InvariantViolation(f"density matrix trace {tr} deviates from 1 "
                                         f"by {abs(tr - 1.0):.3e} (tol {trace_tol:.1e})")
            lo = np.linalg.eigvalsh(matrix)[0]
            if lo < POSITIVITY_TOL:
                raise InvariantViolation(f"density matrix has eigenvalue {lo:.3e} below {POSITIVITY_TOL:.1e}")
        self.matrix = matrix
        self.n_modes = n_modes
        self.basis = basis


def _as_matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)


def lowering_operator(basis: FockBasis) -> np.ndarray:
    """Ladder operator with <n-1| a |n> = sqrt(n); annihilates the vacuum.

    On the truncated space [a, a^+] = 1 only holds on the leading
    (n_levels - 1)-dimensional block; the last diagonal entry of the
    commutator is -(n_levels - 1) by construction.
    """
    n = basis.n_levels
    return np.diag(np.sqrt(np.arange(1.0, n)), k=1)


def position_operator(basis: FockBasis) -> np.ndarray:
    """x = (a + a^+)/sqrt(2), Hermitian tridiagonal with <n-1| x |n> = sqrt(n/2)."""
    a = lowering_operator(basis)
    return (a + a.T) / np.sqrt(2.0)


def oscillator_wavefunction(n: int, x) -> np.ndarray:
    """Real-space oscillator eigenfunction psi_n(x) in oscillator-length units.

    Uses the normalized recurrence
        psi_0 = pi^(-1/4) exp(-x^2/2),
        psi_1 = sqrt(2) x psi_0,
        psi_n = sqrt(2/n) x psi_{n-1} - sqrt((n-1)/n) psi_{n-2},
    which keeps every intermediate at unit norm (no n! overflow).  Vectorized
    over x.
    """
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError(f"level index must be a non-negative integer, got {n!r}")
    x = np.asarray(x, dtype=float)
    prev = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n == 0:
        return prev
    cur = np.sqrt(2.0) * x * prev
    for k in range(2, n + 1):
        prev, cur = cur, np.sqrt(2.0 / k) * x * cur - np.sqrt((k - 1.0) / k) * prev
    return cur


def thermal_state(basis: FockBasis, temperature: Temperature, hamiltonian: np.ndarray) -> DensityOperator:
    """Gibbs state exp(-H/omega_T)/Z of an arbitrary Hermitian H.

    Diagonalizes H and populates its eigenstates with Boltzmann weights
    relative to the ground energy, so deep-cold temperatures underflow
    harmlessly instead of overflowing.
    """
    h = np.asarray(hamiltonian)
    n_modes = _infer_modes(h.shape[0], basis)
    scale = max(1.0, np.abs(h).max())
    if np.abs(h - h.conj().T).max() > 1e-10 * scale:
        raise ValueError("thermal_state needs a Hermitian Hamiltonian")
    energies, vectors = np.linalg.eigh(h)
    weights = np.exp(-(energies - energies[0]) / temperature.omega_T)
    weights /= weights.sum()
    rho = (vectors * weights) @ vectors.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityOperator(rho, basis, n_modes)


def ground_state(basis: FockBasis, hamiltonian: np.ndarray) -> DensityOperator:
    """Projector onto the lowest eigenvector of H (the omega_T -> 0 limit)."""
    h = np.asarray(hamiltonian)
    n_modes = _infer_modes(h.shape[0], basis)
    _, vectors = np.linalg.eigh(h)
    v = vectors[:, 0]
    return DensityOperator(np.outer(v, v.conj()), basis, n_modes)


def _infer_modes(dim: int, basis: FockBasis) -> int:
    n = basis.n_levels
    if dim == n:
        return 1
    if dim == n * n:
        return 2
    raise ValueError(f"dimension {dim} is neither one nor two modes of {n} levels")


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the gas (left factor) as the slow index."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise ValueError(f"tensor_product needs two equal square matrices, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def partial_trace_bath(rho_total, basis: FockBasis) -> DensityOperator:
    """Trace out the bath (right Kronecker factor) of a two-mode state."""
    m = _as_matrix(rho_total)
    n = basis.n_levels
    if m.shape != (n * n, n * n):
        raise ValueError(f"expected a two-mode {n * n}x{n * n} matrix, got {m.shape}")
    reduced = np.einsum('abcb->ac', m.reshape(n, n, n, n))
    return DensityOperator(reduced, basis, 1)


def trace_distance(rho, sigma) -> float:
    """D(rho, sigma) = (1/2) sum |eigvals(rho - sigma)| for Hermitian inputs."""
    a = _as_matrix(rho)
    b = _as_matrix(sigma)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return 0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum()


def energy(rho, hamiltonian: np.ndarray) -> float:
    """tr[H rho], asserted real to within 1e-8; returns the real part."""
    m = _as_matrix(rho)
    h = np.asarray(hamiltonian)
    value = np.einsum('ij,ji->', h, m)
    if abs(value.imag) > ENERGY_IMAG_TOL:
        raise InvariantViolation(f"energy expectation has imaginary part {value.imag:.3e}")
    return float(value.real)
