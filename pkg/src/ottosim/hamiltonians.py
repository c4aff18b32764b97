"""Gas-mode and gas-bath Hamiltonians.

The tunable single-mode Hamiltonian is, in units of hbar*Omega,

    H(alpha) = (a^+ a + 1/2)(1 + alpha/2) + (alpha/4)(a^+ a^+ + a a),

whose untruncated spectrum is sqrt(1 + alpha) (n + 1/2): raising the
stiffness alpha from 0 to omega^2 - 1 compresses the mode from frequency 1 to
omega.  The gas-bath coupling is a Gaussian barrier of width sigma centered at
x0, evaluated in the Fock basis by quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import FockBasis, oscillator_wavefunction

QUADRATURE_TOL = 1e-10
_MAX_NODE_DOUBLINGS = 10


@dataclass(frozen=True)
class StiffnessSchedule:
    """Linear stiffness ramp alpha(tau) over a stroke of duration tau_alpha.

    Compression runs 0 -> alpha_max, expansion alpha_max -> 0; a constant
    schedule (alpha_start == alpha_end) is allowed.  1 + alpha must stay
    positive or the mode frequency turns imaginary.
    """

    alpha_start: float
    alpha_end: float
    tau_alpha: float

    def __post_init__(self):
        if not self.tau_alpha > 0:
            raise ValueError(f"tau_alpha must be > 0, got {self.tau_alpha!r}")
        if min(self.alpha_start, self.alpha_end) <= -1.0:
            raise ValueError("stiffness 1 + alpha must stay positive over the ramp")

    def value(self, tau: float) -> float:
        f = tau / self.tau_alpha
        return self.alpha_start + (self.alpha_end - self.alpha_start) * f


@dataclass(frozen=True)
class CouplingSpec:
    """Gaussian coupling parameters: overall strength phi0, width sigma, center x0."""

    phi0: float
    sigma: float
    x0: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma!r}")


def gas_hamiltonian(basis: FockBasis, alpha: float) -> np.ndarray:
    """Single-mode H(alpha): pentadiagonal, real symmetric.

    Diagonal (n + 1/2)(1 + alpha/2); second off-diagonals
    (alpha/4) sqrt((n+1)(n+2)) from the a^+a^+ + aa squeezing term.
    """
    if alpha <= -1.0:
        raise ValueError(f"need alpha > -1, got {alpha!r}")
    n = basis.n_levels
    levels = np.arange(n)
    h = np.diag((levels + 0.5) * (1.0 + 0.5 * alpha))
    off = 0.25 * alpha * np.sqrt((levels[:-2] + 1.0) * (levels[:-2] + 2.0))
    h += np.diag(off, k=2) + np.diag(off, k=-2)
    return h


def gaussian_coupling_matrix(basis: FockBasis, sigma: float, x0: float) -> np.ndarray:
    """Single-mode matrix elements <j| exp(-(x - x0)^2 / 2 sigma^2) |k>.

    Gauss-Legendre quadrature on [-L, L] with L = x0 + 6 max(sigma,
    sqrt(2 n_levels + 1)); the node count starts at 8 n_levels and doubles
    until no element moves by more than 1e-10.  The overall coupling strength
    phi0 is NOT applied here; it enters at assembly in coupled_hamiltonian.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma!r}")
    n = basis.n_levels
    half_width = x0 + 6.0 * max(sigma, np.sqrt(2.0 * n + 1.0))
    nodes = 8 * n
    previous = None
    for _ in range(_MAX_NODE_DOUBLINGS):
        current = _quadrature_pass(n, sigma, x0, half_width, nodes)
        if previous is not None and np.abs(current - previous).max() <= QUADRATURE_TOL:
            return current
        previous = current
        nodes *= 2
    raise RuntimeError(f"Gaussian coupling quadrature did not converge below {QUADRATURE_TOL:g} "
                       f"per element by {nodes} nodes")


def _quadrature_pass(n: int, sigma: float, x0: float, half_width: float, nodes: int) -> np.ndarray:
    t, w = np.polynomial.legendre.leggauss(nodes)
    x = t * half_width
    weight = w * half_width * np.exp(-0.5 * ((x - x0) / sigma) ** 2)
    psi = np.empty((n, nodes))
    psi[0] = oscillator_wavefunction(0, x)
    if n > 1:
        psi[1] = np.sqrt(2.0) * x * psi[0]
    for k in range(2, n):
        psi[k] = np.sqrt(2.0 / k) * x * psi[k - 1] - np.sqrt((k - 1.0) / k) * psi[k - 2]
    phi = (psi * weight) @ psi.T
    return 0.5 * (phi + phi.T)


def coupled_hamiltonian(basis: FockBasis, alpha: float, coupling: CouplingSpec) -> np.ndarray:
    """Two-mode gas+bath Hamiltonian at common stiffness alpha.

    H = H_gas(alpha) (x) 1 + 1 (x) H_bath(alpha) + phi0 * Phi (x) Phi with
    Phi the single-mode Gaussian matrix; gas is the left factor.
    """
    h = gas_hamiltonian(basis, alpha)
    eye = np.eye(basis.n_levels)
    phi = gaussian_coupling_matrix(basis, coupling.sigma, coupling.x0)
    return np.kron(h, eye) + np.kron(eye, h) + coupling.phi0 * np.kron(phi, phi)
