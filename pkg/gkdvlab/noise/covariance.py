"""Diagonal covariance operators and their Hilbert-Schmidt norms"""
from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from gkdvlab.spectral.grid import Grid
from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)

class NoiseError(ValueError):
    """Base exception for noise errors"""
    pass

class InvalidProfileError(NoiseError):
    """Raised when a spectral profile is negative, not even, or cannot be normalized"""
    pass

class InvalidIncrementError(NoiseError):
    """Raised when an increment is requested over a nonpositive time step"""
    pass

ProfileKind = Literal["zero", "power_law", "band_limited", "table"]

class CovarianceOperator(BaseModel):
    """Phi acting as Phi e_m = phi_m e_m on the Fourier basis.

    The profile is stored in FFT slot order, is even in m and vanishes at the
    Nyquist slot.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid
    profile: np.ndarray
    kind: ProfileKind = "table"

    @field_validator("profile", mode="before")
    def ensure_real_array(cls, value) -> np.ndarray:
        return np.array(value, dtype=np.float64)

    @model_validator(mode="after")
    def validate_profile(self):
        g = self.grid
        phi = self.profile
        if phi.shape != (g.n,):
            raise InvalidProfileError(f"Profile needs {g.n} values, got shape {phi.shape}")
        if not np.all(np.isfinite(phi)) or np.any(phi < 0):
            raise InvalidProfileError("Profile values must be finite and nonnegative")
        if not np.allclose(phi[g.conjugate_index()], phi, rtol=1e-12, atol=0.0):
            raise InvalidProfileError("Profile must be even in m")
        if phi[g.nyquist_index] != 0.0:
            logger.debug("Nyquist entry of the noise profile forced to 0")
            phi[g.nyquist_index] = 0.0
        phi.setflags(write=False)
        return self

    @classmethod
    def zero(cls, grid: Grid) -> "CovarianceOperator":
        return cls(grid=grid, profile=np.zeros(grid.n), kind="zero")

    @classmethod
    def power_law(cls, grid: Grid, amplitude: float = 1.0, decay_r: float = 2.5) -> "CovarianceOperator":
        """phi_m = A (1 + xi_m^2)^(-r/2)"""
        if amplitude < 0:
            raise InvalidProfileError(f"Amplitude must be >= 0, got {amplitude}")
        return cls(grid=grid, profile=amplitude * (1.0 + grid.xi ** 2) ** (-0.5 * decay_r), kind="power_law")

    @classmethod
    def band_limited(cls, grid: Grid, amplitude: float = 1.0, cutoff: float = 1.0) -> "CovarianceOperator":
        """phi_m = A on |xi_m| <= xi_c, 0 elsewhere"""
        if amplitude < 0:
            raise InvalidProfileError(f"Amplitude must be >= 0, got {amplitude}")
        return cls(
            grid=grid,
            profile=np.where(np.abs(grid.xi) <= cutoff, amplitude, 0.0),
            kind="band_limited"
        )

    @classmethod
    def from_table(cls, grid: Grid, half_table: Sequence[float]) -> "CovarianceOperator":
        """Profile from explicit values phi_0, phi_1, ..., mirrored to negative modes.

        Missing trailing entries are zero; entries past m = n/2 - 1 are rejected.
        """
        half = np.asarray(half_table, dtype=np.float64)
        if half.ndim != 1 or len(half) > grid.n // 2:
            raise InvalidProfileError(
                f"Table needs at most {grid.n // 2} entries (m = 0 .. n/2 - 1), got {half.shape}"
            )
        magnitudes = np.abs(grid.modes)
        profile = np.zeros(grid.n)
        inside = magnitudes < len(half)
        profile[inside] = half[magnitudes[inside]]
        profile[grid.nyquist_index] = 0.0
        return cls(grid=grid, profile=profile, kind="table")

    @classmethod
    def single_mode(cls, grid: Grid, m: int, amplitude: float = 1.0) -> "CovarianceOperator":
        """phi_{+-m} = amplitude, all other modes zero"""
        table = np.zeros(m + 1)
        table[m] = amplitude
        return cls.from_table(grid, table)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.profile)

    def hs_norm(self, sigma: float) -> float:
        """sqrt(sum_m phi_m^2 (1 + xi_m^2)^sigma), every slot counted once."""
        return float(np.sqrt(np.sum(self.profile ** 2 * (1.0 + self.grid.xi ** 2) ** sigma)))

    def hs_norm_homogeneous(self, s: float) -> float:
        """sqrt(sum_m phi_m^2 |xi_m|^(2s)); the zero mode drops out for s > 0."""
        weights = np.abs(self.grid.xi) ** (2.0 * s) if s > 0 else np.ones(self.grid.n)
        return float(np.sqrt(np.sum(self.profile ** 2 * weights)))

    def scaled(self, factor: float) -> "CovarianceOperator":
        return CovarianceOperator(grid=self.grid, profile=factor * self.profile, kind=self.kind)

    def normalized(self, sigma: float) -> "CovarianceOperator":
        """Rescale so that hs_norm(sigma) == 1."""
        norm = self.hs_norm(sigma)
        if norm == 0.0:
            raise InvalidProfileError("Cannot normalize a zero noise profile")
        return self.scaled(1.0 / norm)

    def truncate(self, m_max: int) -> "CovarianceOperator":
        """Keep modes |m| <= m_max."""
        profile = np.where(np.abs(self.grid.modes) <= m_max, self.profile, 0.0)
        return CovarianceOperator(grid=self.grid, profile=profile, kind=self.kind)

def hs_norm(phi: CovarianceOperator, sigma: float) -> float:
    return phi.hs_norm(sigma)

def required_sigma(k: int, epsilon: float = 0.1) -> float:
    """Noise regularity needed for global existence: 1 + epsilon for k = 2, 1 for k = 3."""
    return 1.0 + epsilon if k == 2 else 1.0

def default_covariance(grid: Grid, k: int, epsilon: float = 0.1, decay_r: float = 2.5) -> CovarianceOperator:
    """Power-law profile normalized to hs_norm(required_sigma(k)) == 1."""
    return CovarianceOperator.power_law(grid, 1.0, decay_r).normalized(required_sigma(k, epsilon))
