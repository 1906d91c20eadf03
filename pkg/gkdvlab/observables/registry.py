"""Named observables evaluated on batched coefficient arrays"""
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from gkdvlab.noise.covariance import CovarianceOperator
from gkdvlab.observables.conserved import (
    hamiltonian_coeffs,
    hamiltonian_ito_drift_coeffs,
    mass_coeffs,
    mass_moment_drift_coeffs,
)
from gkdvlab.observables.trajectory import UnknownObservableError
from gkdvlab.spectral.grid import Grid, to_samples
from gkdvlab.spectral.norms import sobolev_norm_sq_coeffs
from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)

class ObservableContext(BaseModel):
    """What an observable may depend on besides the state"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid
    phi: CovarianceOperator
    k: int = 2
    mu: int = 1
    pad_factor: Optional[int] = None

# coeffs (..., n), context, parameter -> values (...)
ObservableFn = Callable[[np.ndarray, ObservableContext, Optional[float]], np.ndarray]

class ObservableRegistry:
    """Registry of observables, addressed as `name` or `name:<parameter>`"""

    def __init__(self):
        self.observables: Dict[str, Dict] = {}  # name -> {implementation, units, parametric}

    def register_observable(self, name: str, implementation: ObservableFn, units: str, parametric: bool = False) -> None:
        """
        Register an observable.

        Args:
            name: Base name, used in schedules and CSV headers
            implementation: Function of (coeffs, context, parameter)
            units: Human-readable units/normalization for output headers
            parametric: Whether the name takes a `:<parameter>` suffix
        """
        self.observables[name.lower()] = {
            'implementation': implementation,
            'units': units,
            'parametric': parametric
        }

    def _resolve(self, key: str):
        base, _, raw = key.partition(":")
        entry = self.observables.get(base.lower())
        if entry is None:
            raise UnknownObservableError(f"Unknown observable: {key}")
        if entry['parametric'] != bool(raw):
            expected = f"{base}:<parameter>" if entry['parametric'] else base
            raise UnknownObservableError(f"Observable '{key}' must be written as '{expected}'")
        try:
            parameter = float(raw) if raw else None
        except ValueError:
            raise UnknownObservableError(f"Observable parameter in '{key}' is not a number")
        return entry, parameter

    def has_observable(self, key: str) -> bool:
        try:
            self._resolve(key)
            return True
        except UnknownObservableError:
            return False

    def list_observables(self) -> List[str]:
        return [f"{name}:<p>" if entry['parametric'] else name for name, entry in self.observables.items()]

    def units(self, key: str) -> str:
        entry, parameter = self._resolve(key)
        return entry['units'].replace("<p>", f"{parameter:g}") if parameter is not None else entry['units']

    def header(self, key: str) -> str:
        """CSV column header naming the observable and its units"""
        return f"{key} [{self.units(key)}]"

    def evaluate(self, key: str, coeffs: np.ndarray, context: ObservableContext) -> np.ndarray:
        """Evaluate an observable on coefficient arrays of shape (..., n)."""
        entry, parameter = self._resolve(key)
        return np.asarray(entry['implementation'](coeffs, context, parameter), dtype=np.float64)

    def evaluate_many(self, keys: List[str], coeffs: np.ndarray, context: ObservableContext) -> Dict[str, np.ndarray]:
        return {key: self.evaluate(key, coeffs, context) for key in keys}

def _mass_moment(coeffs, ctx, q):
    return mass_coeffs(coeffs, ctx.grid) ** q

def _linf(coeffs, ctx, _):
    return np.max(np.abs(to_samples(coeffs, ctx.grid)), axis=-1)

def default_registry() -> ObservableRegistry:
    registry = ObservableRegistry()
    registry.register_observable(
        "mass", lambda c, ctx, _: mass_coeffs(c, ctx.grid), "||u||^2_L2, sum u_j^2 dx over one period")
    registry.register_observable(
        "hamiltonian", lambda c, ctx, _: hamiltonian_coeffs(c, ctx.grid, ctx.k, ctx.mu, ctx.pad_factor),
        "1/2||Du||^2 - mu/((k+1)(k+2)) int u^(k+2)")
    registry.register_observable(
        "hamiltonian_ito_drift", lambda c, ctx, _: hamiltonian_ito_drift_coeffs(c, ctx.grid, ctx.phi, ctx.k, ctx.mu),
        "d/dt E H per unit time")
    registry.register_observable("mass_moment", _mass_moment, "||u||^(2*<p>)", parametric=True)
    registry.register_observable(
        "mass_moment_drift", lambda c, ctx, q: mass_moment_drift_coeffs(c, ctx.grid, ctx.phi, int(q)),
        "d/dt E ||u||^(2*<p>) per unit time", parametric=True)
    registry.register_observable(
        "sobolev_sq", lambda c, ctx, s: sobolev_norm_sq_coeffs(c, ctx.grid, s), "||u||^2_H^<p>", parametric=True)
    registry.register_observable("linf", _linf, "max_j |u_j|")
    return registry
