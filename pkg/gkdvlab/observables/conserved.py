"""Mass, Hamiltonian and their Ito drifts.

For u_t + u_xxx + mu u^k u_x = Phi W_t the deterministic flow conserves

    M(u) = ||u||^2,    H(u) = 1/2 ||D u||^2 - mu / ((k+1)(k+2)) int u^(k+2) dx,

and Ito's formula adds the drifts computed below. For a diagonal Phi the sums
over the real orthonormal basis collapse to sums over Fourier slots; the
`*_by_basis` functions evaluate the basis sums directly and serve as oracles.
"""
from typing import Optional

import numpy as np

from gkdvlab.noise.covariance import CovarianceOperator
from gkdvlab.observables.trajectory import ObservableError
from gkdvlab.spectral.dealias import dealiased_power_integral, default_pad_factor
from gkdvlab.spectral.grid import Field, Grid, real_orthonormal_basis, to_coeffs, to_samples

def mass_coeffs(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """L sum |c_m|^2 over the last axis (= sum u_j^2 dx)."""
    return grid.length * np.sum(np.abs(coeffs) ** 2, axis=-1)

def mass(u: Field) -> float:
    """||u||^2_{L^2} = sum_j u_j^2 dx"""
    return float(np.sum(u.samples ** 2) * u.grid.dx)

def hamiltonian_coeffs(
    coeffs: np.ndarray,
    grid: Grid,
    k: int,
    mu: int = 1,
    pad_factor: Optional[int] = None
) -> np.ndarray:
    pad_factor = default_pad_factor(k) if pad_factor is None else pad_factor
    kinetic = 0.5 * grid.length * np.sum(grid.xi ** 2 * np.abs(coeffs) ** 2, axis=-1)
    potential = dealiased_power_integral(coeffs, grid, k + 2, pad_factor)
    return kinetic - mu * potential / ((k + 1) * (k + 2))

def hamiltonian(u: Field, k: int, mu: int = 1, pad_factor: Optional[int] = None) -> float:
    """1/2 ||D^1 u||^2 - mu/((k+1)(k+2)) int u^(k+2), the power integral on the padded grid."""
    return float(hamiltonian_coeffs(to_coeffs(u.samples, u.grid), u.grid, k, mu, pad_factor))

def hamiltonian_ito_drift_coeffs(
    coeffs: np.ndarray,
    grid: Grid,
    phi: CovarianceOperator,
    k: int,
    mu: int = 1
) -> np.ndarray:
    phi2 = phi.profile ** 2
    gradient_trace = float(np.sum(phi2 * grid.xi ** 2))
    power_sum = np.sum(to_samples(coeffs, grid) ** k, axis=-1) * grid.dx
    return 0.5 * (gradient_trace - mu * float(np.sum(phi2)) * power_sum / grid.length)

def hamiltonian_ito_drift(u: Field, phi: CovarianceOperator, k: int, mu: int = 1) -> float:
    """1/2 sum_j int |d/dx Phi e_j|^2 - mu u^k (Phi e_j)^2 dx.

    Closed form for diagonal Phi:
    1/2 [sum_m phi_m^2 xi_m^2 - mu (1/L) sum_m phi_m^2 sum_j u_j^k dx].
    """
    u.grid.require_same(phi.grid)
    return float(hamiltonian_ito_drift_coeffs(to_coeffs(u.samples, u.grid), u.grid, phi, k, mu))

def hamiltonian_ito_drift_by_basis(u: Field, phi: CovarianceOperator, k: int, mu: int = 1) -> float:
    """Explicit sum over the real orthonormal basis."""
    g = u.grid
    basis, modes = real_orthonormal_basis(g)
    weights = phi.profile[modes]
    total = 0.0
    for e, w in zip(basis, weights):
        image = w * e
        gradient = to_samples(1j * g.xi_odd * to_coeffs(image, g), g)
        total += np.sum(gradient ** 2) * g.dx - mu * np.sum(u.samples ** k * image ** 2) * g.dx
    return 0.5 * float(total)

def mass_cross_term_coeffs(coeffs: np.ndarray, grid: Grid, phi: CovarianceOperator) -> np.ndarray:
    """sum_j (u, Phi e_j)^2 = L sum_m phi_m^2 |c_m|^2"""
    return grid.length * np.sum(phi.profile ** 2 * np.abs(coeffs) ** 2, axis=-1)

def mass_cross_term_by_basis(u: Field, phi: CovarianceOperator) -> float:
    """Explicit sum_j (u, Phi e_j)^2 over the real orthonormal basis."""
    basis, modes = real_orthonormal_basis(u.grid)
    inner = (basis @ u.samples) * u.grid.dx * phi.profile[modes]
    return float(np.sum(inner ** 2))

def mass_moment_drift_coeffs(coeffs: np.ndarray, grid: Grid, phi: CovarianceOperator, q: int) -> np.ndarray:
    if q < 1 or int(q) != q:
        raise ObservableError(f"Moment order q must be an integer >= 1, got {q}")
    hs0_sq = phi.hs_norm(0.0) ** 2
    m = mass_coeffs(coeffs, grid)
    if q == 1:
        return np.full(np.shape(m), hs0_sq)
    cross = mass_cross_term_coeffs(coeffs, grid, phi)
    # q = 2 uses ||u||^0 = 1 even at u = 0
    lower = np.ones_like(m) if q == 2 else m ** (q - 2)
    return q * m ** (q - 1) * hs0_sq + 2 * q * (q - 1) * lower * cross

def mass_moment_drift(u: Field, phi: CovarianceOperator, q: int) -> float:
    """Drift of ||u||^(2q): q||u||^(2(q-1)) ||Phi||^2 + 2q(q-1)||u||^(2(q-2)) sum_j (u, Phi e_j)^2."""
    u.grid.require_same(phi.grid)
    return float(mass_moment_drift_coeffs(to_coeffs(u.samples, u.grid), u.grid, phi, q))

def hamiltonian_second_variation(u: Field, w1: Field, w2: Field, k: int, mu: int = 1) -> float:
    """H''(u)(w1, w2) = (d/dx w1, d/dx w2) - mu int u^k w1 w2 dx"""
    g = u.grid
    g.require_same(w1.grid)
    g.require_same(w2.grid)
    d1 = to_samples(1j * g.xi_odd * to_coeffs(w1.samples, g), g)
    d2 = to_samples(1j * g.xi_odd * to_coeffs(w2.samples, g), g)
    return float(np.sum(d1 * d2) * g.dx - mu * np.sum(u.samples ** k * w1.samples * w2.samples) * g.dx)
