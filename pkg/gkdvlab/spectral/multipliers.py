"""Fourier multipliers: Airy group, fractional derivatives, Bessel potentials, Hilbert transform"""
import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from gkdvlab.spectral.grid import Field, Grid, InvalidOrderError, SpectralError, to_coeffs, to_samples
from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)

class SpectralMultiplier(BaseModel):
    """Diagonal operator acting on Fourier coefficients, one value per mode"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid
    values: np.ndarray
    label: str = "multiplier"

    @field_validator("values", mode="before")
    def ensure_complex_array(cls, value) -> np.ndarray:
        array = np.array(value, dtype=np.complex128)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def validate_shape(self):
        if self.values.shape != (self.grid.n,):
            raise SpectralError(
                f"Multiplier needs {self.grid.n} values, got shape {self.values.shape}"
            )
        return self

    def __mul__(self, other: "SpectralMultiplier") -> "SpectralMultiplier":
        """Mode-wise composition"""
        self.grid.require_same(other.grid)
        return SpectralMultiplier(
            grid=self.grid,
            values=self.values * other.values,
            label=f"{self.label}*{other.label}"
        )

    def inverse(self) -> "SpectralMultiplier":
        if np.any(self.values == 0):
            raise SpectralError(f"Multiplier '{self.label}' vanishes on some mode and has no inverse")
        return SpectralMultiplier(grid=self.grid, values=1.0 / self.values, label=f"({self.label})^-1")

    def is_conjugate_symmetric(self, atol: float = 1e-14) -> bool:
        """values(-m) == conj(values(m)), the condition for mapping real fields to real fields"""
        mirrored = self.values[self.grid.conjugate_index()]
        scale = max(1.0, float(np.max(np.abs(self.values), initial=0.0)))
        return bool(np.allclose(mirrored, np.conj(self.values), rtol=0.0, atol=atol * scale))

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        """Apply to a coefficient array (leading batch axes allowed)."""
        return coeffs * self.values

def apply_multiplier(f: Field, M: SpectralMultiplier) -> Field:
    """Multiply the coefficients of f mode-wise by M."""
    f.grid.require_same(M.grid)
    coeffs = M.apply(to_coeffs(f.samples, f.grid))
    if not M.is_conjugate_symmetric():
        logger.warning(f"Multiplier '{M.label}' is not conjugate-symmetric; imaginary part discarded")
    return Field(grid=f.grid, samples=to_samples(coeffs, f.grid))

def identity_multiplier(g: Grid) -> SpectralMultiplier:
    return SpectralMultiplier(grid=g, values=np.ones(g.n), label="Id")

def airy_multiplier(g: Grid, t: float) -> SpectralMultiplier:
    """S(t): exp(i t xi^3). Unit modulus on every mode; the Nyquist symbol is taken as 0."""
    return SpectralMultiplier(grid=g, values=np.exp(1j * t * g.xi_odd ** 3), label=f"S({t:g})")

def airy_values(g: Grid, t: float) -> np.ndarray:
    """Raw exp(i t xi^3) table, for inner loops that skip model construction."""
    return np.exp(1j * t * g.xi_odd ** 3)

def fractional_derivative_multiplier(g: Grid, gamma: float) -> SpectralMultiplier:
    """D^gamma: |xi|^gamma, zero at m = 0 for every gamma (gamma = 0 projects out the mean)."""
    if gamma < 0:
        raise InvalidOrderError(f"Fractional derivative order must be >= 0, got {gamma}")
    values = np.zeros(g.n)
    nonzero = g.modes != 0
    values[nonzero] = np.abs(g.xi[nonzero]) ** gamma
    return SpectralMultiplier(grid=g, values=values, label=f"D^{gamma:g}")

def derivative_multiplier(g: Grid) -> SpectralMultiplier:
    """d/dx: i xi, Nyquist zeroed."""
    return SpectralMultiplier(grid=g, values=1j * g.xi_odd, label="dx")

def fractional_derivative_dx_multiplier(g: Grid, gamma: float) -> SpectralMultiplier:
    """D^gamma d/dx as the single symbol i xi |xi|^gamma."""
    return SpectralMultiplier(
        grid=g,
        values=derivative_multiplier(g).values * fractional_derivative_multiplier(g, gamma).values,
        label=f"D^{gamma:g}dx"
    )

def bessel_multiplier(g: Grid, sigma: float) -> SpectralMultiplier:
    """J_sigma: (1 + xi^2)^(sigma/2)."""
    return SpectralMultiplier(grid=g, values=(1.0 + g.xi ** 2) ** (0.5 * sigma), label=f"J_{sigma:g}")

def hilbert_multiplier(g: Grid) -> SpectralMultiplier:
    """Hilbert transform: -i sign(xi), zero at m = 0 and at Nyquist.

    With this sign convention H(cos) = sin and d/dx = -H o D^1.
    """
    return SpectralMultiplier(grid=g, values=-1j * np.sign(g.xi_odd), label="H")
