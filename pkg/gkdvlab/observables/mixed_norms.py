"""Mixed space-time norms L^q_x(L^p_t) and the X_k^T norm family.

The inner temporal norm uses the trapezoid rule on the snapshot lattice (max
for p = inf), the outer spatial norm the rectangle rule over one period (max
for q = inf). Lattice maxima are lower estimates of the continuous-time sups.
All functions accept sample arrays of shape (..., n_t, n).
"""
import math
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from gkdvlab.observables.constants import ExistenceConstants
from gkdvlab.observables.trajectory import EmptyTrajectoryError, ObservableError, TrajectoryView
from gkdvlab.spectral.grid import Grid, to_coeffs, to_samples

Operator = Literal["none", "D", "dx", "Ddx"]

class MixedNormSpec(BaseModel):
    """||op u||_{L^q_x(L^p_t)}; op is D^gamma, d/dx, D^gamma d/dx or nothing"""
    model_config = ConfigDict(frozen=True)

    q_x: float
    p_t: float
    op: Operator = "none"
    gamma: float = 0.0
    orientation: Literal["x-outer"] = "x-outer"

    @field_validator("q_x", "p_t")
    def validate_exponent(cls, v: float) -> float:
        if not v >= 1:
            raise ValueError(f"Exponents must lie in [1, inf], got {v}")
        return v

    @field_validator("gamma")
    def validate_gamma(cls, v: float) -> float:
        if v < 0:
            raise ValueError(f"gamma must be >= 0, got {v}")
        return v

    def symbol(self, grid: Grid) -> Optional[np.ndarray]:
        """Multiplier values, or None for the identity"""
        if self.op == "none":
            return None
        if self.op == "dx":
            return 1j * grid.xi_odd
        magnitude = np.zeros(grid.n)
        nonzero = grid.modes != 0
        magnitude[nonzero] = np.abs(grid.xi[nonzero]) ** self.gamma
        if self.op == "D":
            return magnitude.astype(np.complex128)
        return 1j * grid.xi_odd * magnitude

    def describe(self) -> str:
        ops = {"none": "u", "D": f"D^{self.gamma:g}u", "dx": "u_x", "Ddx": f"D^{self.gamma:g}u_x"}
        return f"||{ops[self.op]}||_L^{self.q_x:g}_x(L^{self.p_t:g}_t)"

def _apply_op(samples: np.ndarray, grid: Grid, spec: MixedNormSpec) -> np.ndarray:
    symbol = spec.symbol(grid)
    if symbol is None:
        return samples
    return to_samples(to_coeffs(samples, grid) * symbol, grid)

def temporal_norm(values: np.ndarray, times: np.ndarray, p: float) -> np.ndarray:
    """L^p_t of |values| along axis -2."""
    magnitude = np.abs(values)
    if math.isinf(p):
        return np.max(magnitude, axis=-2)
    if len(times) < 2:
        return np.zeros(magnitude.shape[:-2] + magnitude.shape[-1:])
    return np.trapezoid(magnitude ** p, x=times, axis=-2) ** (1.0 / p)

def spatial_norm(values: np.ndarray, grid: Grid, q: float) -> np.ndarray:
    """L^q_x along the last axis by the rectangle rule."""
    if math.isinf(q):
        return np.max(values, axis=-1)
    return (np.sum(values ** q, axis=-1) * grid.dx) ** (1.0 / q)

def mixed_norm_samples(samples: np.ndarray, times: np.ndarray, grid: Grid, spec: MixedNormSpec) -> np.ndarray:
    if samples.shape[-2] == 0:
        raise EmptyTrajectoryError("Mixed norm of an empty trajectory")
    inner = temporal_norm(_apply_op(samples, grid, spec), times, spec.p_t)
    return spatial_norm(inner, grid, spec.q_x)

def mixed_norm(tr: TrajectoryView, spec: MixedNormSpec) -> float:
    """||op u||_{L^q_x(L^p_t)} over the trajectory's lattice."""
    return float(mixed_norm_samples(tr.samples, tr.times, tr.grid, spec))

def sup_sobolev_samples(samples: np.ndarray, grid: Grid, sigma: float, homogeneous: bool) -> np.ndarray:
    """max_i of ||D^sigma u(t_i)||_{L^2} (homogeneous) or ||u(t_i)||_{H^sigma}."""
    if homogeneous:
        weights = np.where(grid.modes != 0, np.abs(grid.xi) ** (2.0 * sigma), 0.0)
    else:
        weights = (1.0 + grid.xi ** 2) ** sigma
    norms_sq = grid.length * np.sum(weights * np.abs(to_coeffs(samples, grid)) ** 2, axis=-1)
    return np.sqrt(np.max(norms_sq, axis=-1))

Weight = Literal["none", "rho", "sixth"]

class XkComponent(BaseModel):
    """One mu_j / nu_j: either a sup-in-time Sobolev norm or a weighted mixed norm.

    moment_power and envelope describe the moment bound known for the
    stochastic convolution: E[component(v)^moment_power] <= C (1+T)^(-envelope_weight rho) sum_e T^e.
    envelope_weight is nonzero only for the rho-weighted component.
    noise_sigma is the Hilbert-Schmidt regularity that bound asks of Phi.
    """
    model_config = ConfigDict(frozen=True)

    name: str
    mixed: Optional[MixedNormSpec] = None
    sup_sigma: Optional[float] = None
    sup_homogeneous: bool = False
    weight: Weight = "none"
    moment_power: float
    envelope: Tuple[float, ...]
    envelope_weight: float = 0.0
    noise_sigma: float

    def envelope_value(self, T: float, rho: float) -> float:
        return (1.0 + T) ** (-self.envelope_weight * rho) * sum(T ** e for e in self.envelope)

    def evaluate(self, samples: np.ndarray, times: np.ndarray, grid: Grid, rho: float) -> np.ndarray:
        if self.mixed is None:
            return sup_sobolev_samples(samples, grid, self.sup_sigma, self.sup_homogeneous)
        value = mixed_norm_samples(samples, times, grid, self.mixed)
        T = float(times[-1] - times[0])
        if self.weight == "rho":
            return value * (1.0 + T) ** (-rho)
        if self.weight == "sixth":
            return value * T ** (-1.0 / 6.0) if T > 0 else np.zeros_like(value)
        return value

XK_COMPONENTS: Dict[int, List[XkComponent]] = {
    2: [
        XkComponent(name="mu1", sup_sigma=0.25, sup_homogeneous=True, moment_power=2, envelope=(1,), noise_sigma=0.25),
        XkComponent(name="mu2", mixed=MixedNormSpec(q_x=20, p_t=2.5, op="D", gamma=1.0),
                    moment_power=20, envelope=(9,), noise_sigma=1 / 9),
        XkComponent(name="mu3", mixed=MixedNormSpec(q_x=5, p_t=10, op="D", gamma=0.25),
                    moment_power=5, envelope=(3,), noise_sigma=11 / 20),
        XkComponent(name="mu4", mixed=MixedNormSpec(q_x=math.inf, p_t=2, op="Ddx", gamma=0.25),
                    moment_power=2, envelope=(2,), noise_sigma=9 / 20),
        XkComponent(name="mu5", mixed=MixedNormSpec(q_x=4, p_t=math.inf),
                    moment_power=4, envelope=(1, 4), noise_sigma=1.1),
    ],
    3: [
        XkComponent(name="nu1", sup_sigma=1 / 12, moment_power=2, envelope=(1,), noise_sigma=1 / 12),
        XkComponent(name="nu2", mixed=MixedNormSpec(q_x=42 / 13, p_t=21 / 4), weight="rho",
                    moment_power=42 / 13, envelope=(29 / 13,), envelope_weight=42 / 13, noise_sigma=4 / 21),
        XkComponent(name="nu3", mixed=MixedNormSpec(q_x=60 / 13, p_t=15),
                    moment_power=60 / 13, envelope=(34 / 13,), noise_sigma=17 / 60),
        XkComponent(name="nu4", mixed=MixedNormSpec(q_x=10 / 3, p_t=30 / 7), weight="sixth",
                    moment_power=10 / 3, envelope=(41 / 18,), noise_sigma=1 / 5),
        XkComponent(name="nu5", mixed=MixedNormSpec(q_x=10 / 3, p_t=30 / 7, op="D", gamma=1 / 12), weight="sixth",
                    moment_power=10 / 3, envelope=(41 / 18,), noise_sigma=17 / 60),
        XkComponent(name="nu6", mixed=MixedNormSpec(q_x=math.inf, p_t=2, op="dx"),
                    moment_power=2, envelope=(2,), noise_sigma=2 / 5),
        XkComponent(name="nu7", mixed=MixedNormSpec(q_x=math.inf, p_t=2, op="Ddx", gamma=1 / 12),
                    moment_power=2, envelope=(2,), noise_sigma=5 / 12),
    ],
}

# (moment_power, envelope); the (1+T) weight of nu2 lives on XkComponent.envelope_weight
XK_MOMENT_BOUNDS: Dict[str, Tuple[float, Tuple[float, ...]]] = {
    c.name: (c.moment_power, c.envelope) for comps in XK_COMPONENTS.values() for c in comps
}

def xk_component(k: int, name: str) -> XkComponent:
    for component in XK_COMPONENTS.get(k, []):
        if component.name == name:
            return component
    raise ObservableError(f"No component '{name}' for k={k}")

class XkNorm(BaseModel):
    """||u||_{X_k^T} with its components; mu1_inhomogeneous is sup_t ||u||_{H^1/4} (k = 2 only)"""
    value: float
    components: Dict[str, float]
    mu1_inhomogeneous: Optional[float] = None
    horizon: float
    length: float

def xk_components_samples(
    samples: np.ndarray,
    times: np.ndarray,
    grid: Grid,
    k: int,
    rho: float = 1.0
) -> Dict[str, np.ndarray]:
    """Every component of X_k^T, batched over leading axes."""
    if k not in XK_COMPONENTS:
        raise ObservableError(f"X_k norms exist for k in (2, 3), got {k}")
    return {c.name: c.evaluate(samples, times, grid, rho) for c in XK_COMPONENTS[k]}

def xk_norm(tr: TrajectoryView, k: int, consts: Optional[ExistenceConstants] = None) -> XkNorm:
    """max_j mu_j (k = 2) or max_j nu_j (k = 3), with the breakdown."""
    consts = consts or ExistenceConstants()
    values = xk_components_samples(tr.samples, tr.times, tr.grid, k, consts.rho)
    components = {name: float(v) for name, v in values.items()}
    extra = None
    if k == 2:
        extra = float(sup_sobolev_samples(tr.samples, tr.grid, 0.25, homogeneous=False))
    return XkNorm(
        value=max(components.values()),
        components=components,
        mu1_inhomogeneous=extra,
        horizon=tr.horizon,
        length=tr.grid.length
    )
