"""Strang splitting and exponential Euler for du + (u_xxx + mu u^k u_x) dt = Phi dW.

Both schemes treat the Airy part exactly through its Fourier multiplier and add
the one-step stochastic-convolution increment after the deterministic substeps,
so each increment is independent of the pre-step state.
"""
from typing import Callable, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from gkdvlab.dynamics.config import SimConfig, State
from gkdvlab.dynamics.initial_data import initial_field
from gkdvlab.dynamics.nonlinear import DynamicsError, check_pad_factor, nonlinear_rhs_coeffs
from gkdvlab.noise.covariance import CovarianceOperator
from gkdvlab.noise.rng import RngStream
from gkdvlab.noise.sampling import sample_increment_coeffs
from gkdvlab.observables.trajectory import TrajectoryView
from gkdvlab.spectral.grid import Field, Grid, to_coeffs, to_samples
from gkdvlab.spectral.multipliers import airy_values
from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)

class Trajectory(BaseModel):
    """Saved snapshots of one run, kept as coefficient arrays"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    grid: Grid
    times: np.ndarray
    coeffs: np.ndarray
    v_coeffs: Optional[np.ndarray] = None
    blowup_time: Optional[float] = None

    def __len__(self) -> int:
        return len(self.times)

    @property
    def samples(self) -> np.ndarray:
        return to_samples(self.coeffs, self.grid)

    @property
    def states(self) -> List[State]:
        out = []
        for i, t in enumerate(self.times):
            v = None if self.v_coeffs is None else Field.from_coeffs(self.grid, self.v_coeffs[i])
            out.append(State(t=float(t), u=Field.from_coeffs(self.grid, self.coeffs[i]), v=v))
        return out

    @property
    def final_state(self) -> State:
        return self.states[-1]

    def view(self) -> TrajectoryView:
        return TrajectoryView(grid=self.grid, times=self.times, samples=self.samples)

    def convolution_view(self) -> TrajectoryView:
        if self.v_coeffs is None:
            raise DynamicsError("This trajectory did not track the stochastic convolution")
        return TrajectoryView(grid=self.grid, times=self.times, samples=to_samples(self.v_coeffs, self.grid))

class BlowUpError(DynamicsError):
    """Raised when the solution overflows; carries the failure time and the partial trajectory"""

    def __init__(self, time: float, trajectory: Optional[Trajectory] = None, peak: float = float("nan")):
        self.time = time
        self.trajectory = trajectory
        self.peak = peak
        super().__init__(f"Blow-up at t={time:.6g} (max|u| = {peak:.3e})")

class NoisePath(BaseModel):
    """Precomputed per-step increments eta_i (coefficients) on a fixed step dt"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid
    dt: float
    increments: np.ndarray

    @field_validator("increments", mode="before")
    def ensure_complex_array(cls, value) -> np.ndarray:
        array = np.array(value, dtype=np.complex128)
        array.setflags(write=False)
        return array

    @property
    def n_steps(self) -> int:
        return self.increments.shape[0]

    @classmethod
    def sample(cls, phi: CovarianceOperator, dt: float, n_steps: int, rng: RngStream) -> "NoisePath":
        """Draw the increments exactly as a stream-driven integration would."""
        increments = [sample_increment_coeffs(phi, dt, rng) for _ in range(n_steps)]
        return cls(grid=phi.grid, dt=dt, increments=np.array(increments).reshape(n_steps, phi.grid.n))

    def coarsen(self) -> "NoisePath":
        """Same Brownian path on step 2 dt: eta = S(dt) eta_{2i} + eta_{2i+1}."""
        if self.n_steps % 2:
            raise DynamicsError(f"Cannot coarsen a path with an odd step count ({self.n_steps})")
        propagator = airy_values(self.grid, self.dt)
        combined = propagator * self.increments[0::2] + self.increments[1::2]
        return NoisePath(grid=self.grid, dt=2.0 * self.dt, increments=combined)

    def convolution(self) -> np.ndarray:
        """Coefficients of v(t_i), i = 0 .. n_steps, driven by this path."""
        propagator = airy_values(self.grid, self.dt)
        out = np.zeros((self.n_steps + 1, self.grid.n), dtype=np.complex128)
        for i in range(self.n_steps):
            out[i + 1] = propagator * out[i] + self.increments[i]
        return out

def _rhs(cfg: SimConfig, grid: Grid) -> Callable[[np.ndarray], np.ndarray]:
    if not cfg.nonlinear:
        return lambda c: np.zeros_like(c)
    return lambda c: nonlinear_rhs_coeffs(c, grid, cfg.k, cfg.mu, cfg.pad_factor)

def strang_coeffs(coeffs: np.ndarray, dt: float, grid: Grid, rhs: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Deterministic Strang step: S(dt/2), RK4 on the nonlinearity, S(dt/2)."""
    half = airy_values(grid, 0.5 * dt)
    c = half * coeffs
    k1 = rhs(c)
    k2 = rhs(c + 0.5 * dt * k1)
    k3 = rhs(c + 0.5 * dt * k2)
    k4 = rhs(c + dt * k3)
    c = c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return half * c

def exp_euler_coeffs(coeffs: np.ndarray, dt: float, grid: Grid, rhs: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Deterministic exponential Euler step: S(dt)(u + dt N(u))."""
    return airy_values(grid, dt) * (coeffs + dt * rhs(coeffs))

SCHEMES = {
    "strang": strang_coeffs,
    "exp-euler": exp_euler_coeffs,
}

def _step_state(s: State, cfg: SimConfig, phi: CovarianceOperator, rng: RngStream, scheme: str) -> State:
    grid = s.u.grid
    phi.grid.require_same(grid)
    check_pad_factor(cfg.k, cfg.pad_factor)
    coeffs = SCHEMES[scheme](to_coeffs(s.u.samples, grid), cfg.dt, grid, _rhs(cfg, grid))
    eta = sample_increment_coeffs(phi, cfg.dt, rng)
    coeffs = coeffs + eta
    u = Field.from_coeffs(grid, coeffs)
    t = s.t + cfg.dt
    peak = float(np.max(np.abs(u.samples)))
    if not np.isfinite(peak) or peak > cfg.blowup_threshold:
        logger.error(f"Blow-up at t={t:.6g}")
        raise BlowUpError(t, peak=peak)
    v = None
    if s.v is not None:
        v = Field.from_coeffs(grid, airy_values(grid, cfg.dt) * s.v.coeffs + eta)
    return State(t=t, u=u, v=v)

def strang_step(s: State, cfg: SimConfig, phi: CovarianceOperator, rng: RngStream) -> State:
    """One Strang step followed by the noise increment."""
    return _step_state(s, cfg, phi, rng, "strang")

def exp_euler_step(s: State, cfg: SimConfig, phi: CovarianceOperator, rng: RngStream) -> State:
    """u_{n+1} = S(dt)[u_n + dt N(u_n)] + eta_n."""
    return _step_state(s, cfg, phi, rng, "exp-euler")

def integrate(
    cfg: SimConfig,
    phi: CovarianceOperator,
    rng: Optional[RngStream] = None,
    u0: Optional[Field] = None,
    noise_path: Optional[NoisePath] = None,
    track_convolution: bool = False
) -> Trajectory:
    """Run cfg.n_steps steps from u0 (cfg.initial when omitted).

    Noise comes from `noise_path` when given, otherwise from `rng`
    (a fresh RngStream(cfg.seed) when that is omitted too).

    Raises:
        BlowUpError: max|u| exceeded cfg.blowup_threshold or became non-finite;
            the error carries the snapshots saved so far.
    """
    grid = cfg.grid
    phi.grid.require_same(grid)
    u0 = initial_field(cfg) if u0 is None else u0
    u0.grid.require_same(grid)
    n_steps = cfg.n_steps
    dt = cfg.dt
    if noise_path is not None:
        noise_path.grid.require_same(grid)
        if noise_path.n_steps != n_steps or not np.isclose(noise_path.dt, dt, rtol=1e-12):
            raise DynamicsError(
                f"Noise path has {noise_path.n_steps} steps of {noise_path.dt:g}, run needs {n_steps} of {dt:g}"
            )
    elif rng is None:
        rng = RngStream(cfg.seed)
    if n_steps % cfg.save_every:
        logger.warning(f"save_every={cfg.save_every} does not divide {n_steps} steps; final interval is shorter")

    step = SCHEMES[cfg.scheme]
    rhs = _rhs(cfg, grid)
    propagator = airy_values(grid, dt)
    noise_free = phi.is_zero and noise_path is None

    c = to_coeffs(u0.samples, grid)
    v = np.zeros(grid.n, dtype=np.complex128)
    times = [0.0]
    saved = [c]
    saved_v = [v]
    cfl_warned = False

    def partial(t_fail: float) -> Trajectory:
        return Trajectory(
            grid=grid,
            times=np.array(times),
            coeffs=np.array(saved),
            v_coeffs=np.array(saved_v) if track_convolution else None,
            blowup_time=t_fail
        )

    for i in range(1, n_steps + 1):
        c = step(c, dt, grid, rhs)
        if noise_path is not None:
            eta = noise_path.increments[i - 1]
        elif noise_free:
            eta = None
        else:
            eta = sample_increment_coeffs(phi, dt, rng)
        if eta is not None:
            c = c + eta
            if track_convolution:
                v = propagator * v + eta
        t = i * dt

        u = to_samples(c, grid)
        peak = float(np.max(np.abs(u)))
        if not np.isfinite(peak) or peak > cfg.blowup_threshold:
            logger.error(f"Blow-up at t={t:.6g} (max|u| = {peak:.3e})")
            raise BlowUpError(t, partial(t), peak)
        if cfg.nonlinear and not cfl_warned and peak > 0 and dt > cfg.cfl * grid.dx / peak ** cfg.k:
            logger.warning(
                f"CFL guard: dt={dt:g} exceeds {cfg.cfl:g} dx / max|u|^k = {cfg.cfl * grid.dx / peak ** cfg.k:.3e} at t={t:.4g}"
            )
            cfl_warned = True

        if i % cfg.save_every == 0 or i == n_steps:
            times.append(t)
            saved.append(c)
            saved_v.append(v)

    return Trajectory(
        grid=grid,
        times=np.array(times),
        coeffs=np.array(saved),
        v_coeffs=np.array(saved_v) if track_convolution else None
    )

SnapshotCallback = Callable[[int, float, np.ndarray, Optional[np.ndarray], np.ndarray], None]

def integrate_batch(
    cfg: SimConfig,
    phi: CovarianceOperator,
    rngs: List[RngStream],
    u0: Field,
    on_snapshot: SnapshotCallback,
    track_convolution: bool = False
) -> np.ndarray:
    """Advance independent trajectories side by side.

    Row j draws from rngs[j] exactly what integrate() would, so it follows the
    same path as a single run on that stream. Instead of storing paths, every
    saved time calls on_snapshot(index, t, coeffs, v_coeffs, alive), where
    coeffs has shape (len(rngs), n). Rows that blow up are zeroed and marked
    dead in `alive`.

    Returns:
        Blow-up time per row, NaN for rows that survived.
    """
    grid = cfg.grid
    phi.grid.require_same(grid)
    u0.grid.require_same(grid)
    n_traj = len(rngs)
    n_steps = cfg.n_steps
    dt = cfg.dt
    step = SCHEMES[cfg.scheme]
    rhs = _rhs(cfg, grid)
    propagator = airy_values(grid, dt)
    noise_free = phi.is_zero

    c = np.tile(to_coeffs(u0.samples, grid), (n_traj, 1))
    v = np.zeros((n_traj, grid.n), dtype=np.complex128) if track_convolution else None
    alive = np.ones(n_traj, dtype=bool)
    blowup_times = np.full(n_traj, np.nan)
    cfl_warned = False
    on_snapshot(0, 0.0, c, v, alive)

    for i in range(1, n_steps + 1):
        c = step(c, dt, grid, rhs)
        if not noise_free:
            eta = np.stack([sample_increment_coeffs(phi, dt, rng) for rng in rngs])
            c = c + eta
            if v is not None:
                v = propagator * v + eta
        t = i * dt
        c[~alive] = 0.0

        u = to_samples(c, grid)
        with np.errstate(invalid="ignore"):
            peaks = np.max(np.abs(u), axis=-1)
        failed = alive & (~np.isfinite(peaks) | (peaks > cfg.blowup_threshold))
        if np.any(failed):
            logger.error(f"Blow-up of {int(failed.sum())} trajectories at t={t:.6g}")
            blowup_times[failed] = t
            alive &= ~failed
            c[failed] = 0.0
            peaks[failed] = 0.0
        peak = float(np.max(peaks, initial=0.0))
        if cfg.nonlinear and not cfl_warned and peak > 0 and dt > cfg.cfl * grid.dx / peak ** cfg.k:
            logger.warning(
                f"CFL guard: dt={dt:g} exceeds {cfg.cfl:g} dx / max|u|^k = {cfg.cfl * grid.dx / peak ** cfg.k:.3e} at t={t:.4g}"
            )
            cfl_warned = True

        if i % cfg.save_every == 0 or i == n_steps:
            on_snapshot(i, t, c, v, alive)

    return blowup_times
