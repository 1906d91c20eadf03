"""Periodic grid, real fields and their Fourier-series coefficients.

Coefficients use the Fourier-series normalization

    c_m = (1/n) sum_j u_j exp(-i xi_m x_j),    u_j = sum_m c_m exp(i xi_m x_j)

with x_j = -L/2 + j dx, so discrete Parseval reads sum_j u_j^2 dx = L sum_m |c_m|^2.
Coefficient arrays are stored in numpy FFT order (m = 0, 1, ..., n/2-1, -n/2, ..., -1)
and every array-level helper accepts arbitrary leading batch axes.
"""
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as ModelField, field_validator, model_validator

from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)

class SpectralError(ValueError):
    """Base exception for spectral toolbox errors"""
    pass

class GridMismatchError(SpectralError):
    """Raised when operands live on different grids"""
    pass

class InvalidOrderError(SpectralError):
    """Raised when a derivative order is out of range"""
    pass

class InvalidExponentError(SpectralError):
    """Raised when a Lebesgue exponent is below 1"""
    pass

@lru_cache(maxsize=64)
def _mode_tables(n: int, length: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    modes = np.rint(np.fft.fftfreq(n) * n).astype(np.int64)
    xi = 2.0 * np.pi * modes / length
    xi_odd = xi.copy()
    # Nyquist is cosine-only: odd symbols vanish there
    xi_odd[n // 2] = 0.0
    phase = np.where(modes % 2 == 0, 1.0, -1.0)
    for table in (modes, xi, xi_odd, phase):
        table.setflags(write=False)
    return modes, xi, xi_odd, phase

class Grid(BaseModel):
    """Uniform periodic grid on [-L/2, L/2) with n samples"""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    n: int = ModelField(description="Number of samples / Fourier modes (even, >= 8)")
    length: float = ModelField(default=100.0, alias="L", gt=0, description="Period L")

    @field_validator("n")
    def validate_n(cls, v: int) -> int:
        """n must be even and at least 8"""
        if v < 8 or v % 2:
            raise ValueError(f"n must be an even integer >= 8, got {v}")
        return v

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        """Sample points x_j = -L/2 + j dx"""
        return -0.5 * self.length + self.dx * np.arange(self.n)

    @property
    def modes(self) -> np.ndarray:
        """Integer mode index m for each coefficient slot (FFT order)"""
        return _mode_tables(self.n, self.length)[0]

    @property
    def xi(self) -> np.ndarray:
        """Wavenumbers xi_m = 2 pi m / L"""
        return _mode_tables(self.n, self.length)[1]

    @property
    def xi_odd(self) -> np.ndarray:
        """Wavenumbers with the Nyquist entry zeroed, for odd symbols"""
        return _mode_tables(self.n, self.length)[2]

    @property
    def phase(self) -> np.ndarray:
        return _mode_tables(self.n, self.length)[3]

    @property
    def nyquist_index(self) -> int:
        return self.n // 2

    def conjugate_index(self) -> np.ndarray:
        """Slot of mode -m for every slot m"""
        return (-np.arange(self.n)) % self.n

    def require_same(self, other: "Grid") -> None:
        if self != other:
            raise GridMismatchError(
                f"Grid mismatch: (n={self.n}, L={self.length}) vs (n={other.n}, L={other.length})"
            )

def to_coeffs(samples: np.ndarray, grid: Grid) -> np.ndarray:
    """Forward transform along the last axis."""
    return np.fft.fft(samples, axis=-1) * (grid.phase / grid.n)

def to_samples(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Inverse transform along the last axis, real part."""
    return np.fft.ifft(coeffs * grid.phase, axis=-1).real * grid.n

def imaginary_residue(coeffs: np.ndarray, grid: Grid) -> float:
    """Largest imaginary part produced by the inverse transform."""
    full = np.fft.ifft(coeffs * grid.phase, axis=-1) * grid.n
    return float(np.max(np.abs(full.imag), initial=0.0))

class Field(BaseModel):
    """A real function sampled on a Grid, with its spectral dual view"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid
    samples: np.ndarray

    @field_validator("samples", mode="before")
    def ensure_real_array(cls, value) -> np.ndarray:
        """Store an owned, read-only float64 copy"""
        array = np.array(value, dtype=np.float64)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def validate_shape(self):
        if self.samples.shape != (self.grid.n,):
            raise SpectralError(
                f"Field needs {self.grid.n} samples, got shape {self.samples.shape}"
            )
        return self

    @classmethod
    def from_coeffs(cls, grid: Grid, coeffs: np.ndarray) -> "Field":
        return cls(grid=grid, samples=to_samples(coeffs, grid))

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid=grid, samples=np.zeros(grid.n))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return cls(grid=grid, samples=fn(grid.x))

    @property
    def coeffs(self) -> np.ndarray:
        return forward_transform(self)

    def __add__(self, other: "Field") -> "Field":
        self.grid.require_same(other.grid)
        return Field(grid=self.grid, samples=self.samples + other.samples)

    def __sub__(self, other: "Field") -> "Field":
        self.grid.require_same(other.grid)
        return Field(grid=self.grid, samples=self.samples - other.samples)

    def __mul__(self, scalar: float) -> "Field":
        return Field(grid=self.grid, samples=self.samples * scalar)

    __rmul__ = __mul__

def forward_transform(f: Field) -> np.ndarray:
    """Fourier-series coefficients of a field, FFT order."""
    return to_coeffs(f.samples, f.grid)

def inverse_transform(grid: Grid, coeffs: np.ndarray) -> Field:
    """Field whose coefficients are `coeffs` (imaginary residue discarded)."""
    return Field.from_coeffs(grid, coeffs)

def spectral_projection(f: Field, m_max: int) -> Field:
    """Keep modes with |m| <= m_max and zero the rest."""
    coeffs = f.coeffs
    coeffs[np.abs(f.grid.modes) > m_max] = 0.0
    return Field.from_coeffs(f.grid, coeffs)

def real_orthonormal_basis(grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    """Real trigonometric basis, orthonormal for the discrete L2 product.

    Returns:
        (basis, modes): basis has shape (n, n), one sampled basis vector per row;
        modes[j] is the |m| of row j.
    """
    x = grid.x
    rows = [np.full(grid.n, 1.0 / np.sqrt(grid.length))]
    modes = [0]
    scale = np.sqrt(2.0 / grid.length)
    for m in range(1, grid.n // 2):
        xi_m = 2.0 * np.pi * m / grid.length
        rows.append(scale * np.cos(xi_m * x))
        rows.append(scale * np.sin(xi_m * x))
        modes.extend([m, m])
    xi_nyq = np.pi * grid.n / grid.length
    rows.append(np.cos(xi_nyq * x) / np.sqrt(grid.length))
    modes.append(grid.n // 2)
    return np.vstack(rows), np.array(modes)

def boundary_mass_fraction(f: Field, strip: float = 0.05) -> float:
    """Share of the L2 mass inside the two boundary strips.

    Args:
        strip: Strip width as a fraction of L, at each end of the period.
    """
    total = float(np.sum(f.samples ** 2))
    if total == 0.0:
        return 0.0
    edge = 0.5 * f.grid.length * (1.0 - 2.0 * strip)
    mask = np.abs(f.grid.x) >= edge
    return float(np.sum(f.samples[mask] ** 2)) / total
