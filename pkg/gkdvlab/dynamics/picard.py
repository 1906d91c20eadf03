"""Picard iteration of the mild equation

    (F u)(t) = S(t) u_0 + v(t) + int_0^t S(t - s) N(u(s)) ds,    N(u) = -mu d/dx (u^(k+1) / (k+1)),

on a uniform time lattice, with the Duhamel integral evaluated by the
trapezoid rule.
"""
from typing import List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from gkdvlab.dynamics.nonlinear import DynamicsError, check_pad_factor, default_pad_factor, nonlinear_rhs_coeffs
from gkdvlab.observables.trajectory import TrajectoryView
from gkdvlab.spectral.grid import Field, Grid, to_coeffs
from gkdvlab.spectral.norms import sobolev_norm_sq_coeffs
from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)

CONTRACTION_SIGMA = {2: 0.25, 3: 1.0 / 12.0}

class NonContractionError(DynamicsError):
    """Raised when the iteration fails to converge within max_iter"""

    def __init__(self, differences: List[float], message: Optional[str] = None):
        self.differences = list(differences)
        super().__init__(message or f"Picard iteration did not converge after {len(differences)} iterations")

class PicardReport(BaseModel):
    """Per-iteration successive differences max_i ||u^(j+1)(t_i) - u^(j)(t_i)||_{H^sigma}"""
    iterations: int
    differences: List[float]
    ratios: List[float]
    sigma: float
    converged: bool

    @property
    def contraction_factor(self) -> Optional[float]:
        return max(self.ratios) if self.ratios else None

class PicardResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    coeffs: np.ndarray
    times: np.ndarray
    grid: Grid
    report: PicardReport

    @property
    def trajectory(self) -> TrajectoryView:
        return TrajectoryView.from_coeffs(self.grid, self.times, self.coeffs)

def duhamel_trapezoid(nonlinear: np.ndarray, propagator: np.ndarray, dt: float) -> np.ndarray:
    """I_i = int_0^{t_i} S(t_i - s) N(s) ds by the trapezoid rule, I_0 = 0.

    Uses I_i = S(dt) I_{i-1} + dt/2 (S(dt) N_{i-1} + N_i).
    """
    out = np.zeros_like(nonlinear)
    for i in range(1, nonlinear.shape[0]):
        out[i] = propagator * (out[i - 1] + 0.5 * dt * nonlinear[i - 1]) + 0.5 * dt * nonlinear[i]
    return out

def picard_solve(
    u0: Field,
    v_path: Union[Sequence[Field], np.ndarray],
    k: int,
    T: float,
    n_steps: int,
    tol: float = 1e-10,
    max_iter: int = 50,
    mu: int = 1,
    pad_factor: Optional[int] = None,
    nonlinear: bool = True
) -> PicardResult:
    """Fixed point of the mild map on t_i = i T / n_steps.

    Args:
        v_path: v(t_i) for i = 0 .. n_steps, as Fields or a coefficient array
        tol: stop once the H^sigma(k) successive difference drops below it

    Raises:
        NonContractionError: max_iter reached or the iterates stopped being finite
    """
    grid = u0.grid
    pad_factor = default_pad_factor(k) if pad_factor is None else pad_factor
    check_pad_factor(k, pad_factor)
    if n_steps < 1:
        raise DynamicsError(f"n_steps must be >= 1, got {n_steps}")
    if isinstance(v_path, np.ndarray):
        v = np.asarray(v_path, dtype=np.complex128)
    else:
        for f in v_path:
            f.grid.require_same(grid)
        v = np.array([f.coeffs for f in v_path])
    if v.shape != (n_steps + 1, grid.n):
        raise DynamicsError(f"v_path must hold {n_steps + 1} snapshots on the solver grid, got shape {v.shape}")

    sigma = CONTRACTION_SIGMA[k]
    dt = T / n_steps
    times = dt * np.arange(n_steps + 1)
    propagator = np.exp(1j * dt * grid.xi_odd ** 3)
    free = np.exp(1j * np.outer(times, grid.xi_odd ** 3)) * to_coeffs(u0.samples, grid)
    base = free + v

    u = base
    differences: List[float] = []
    for iteration in range(1, max_iter + 1):
        if nonlinear:
            N = nonlinear_rhs_coeffs(u, grid, k, mu, pad_factor)
            updated = base + duhamel_trapezoid(N, propagator, dt)
        else:
            updated = base
        difference = float(np.sqrt(np.max(sobolev_norm_sq_coeffs(updated - u, grid, sigma))))
        differences.append(difference)
        logger.debug(f"Picard iteration {iteration}: difference {difference:.3e}")
        if not np.isfinite(difference):
            raise NonContractionError(differences, f"Picard iterates diverged at iteration {iteration}")
        u = updated
        if difference < tol:
            ratios = [b / a for a, b in zip(differences, differences[1:]) if a > 0]
            report = PicardReport(
                iterations=iteration,
                differences=differences,
                ratios=ratios,
                sigma=sigma,
                converged=True
            )
            return PicardResult(coeffs=u, times=times, grid=grid, report=report)

    raise NonContractionError(differences)
