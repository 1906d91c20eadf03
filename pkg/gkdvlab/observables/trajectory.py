"""Discrete space-time carrier for mixed norms"""
import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from gkdvlab.spectral.grid import Grid, to_coeffs, to_samples

class ObservableError(ValueError):
    """Base exception for observable evaluation errors"""
    pass

class EmptyTrajectoryError(ObservableError):
    """Raised when a functional is evaluated on a trajectory without snapshots"""
    pass

class UnknownObservableError(ObservableError, KeyError):
    """Raised when an observable name is not registered"""
    pass

class TrajectoryView(BaseModel):
    """Snapshots u(t_i) on a grid; times strictly increasing"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid
    times: np.ndarray
    samples: np.ndarray

    @field_validator("times", "samples", mode="before")
    def ensure_float_array(cls, value) -> np.ndarray:
        array = np.array(value, dtype=np.float64)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def validate_lattice(self):
        if self.times.size == 0:
            raise EmptyTrajectoryError("Trajectory has no snapshots")
        if self.samples.shape != (self.times.size, self.grid.n):
            raise ObservableError(
                f"Samples must have shape ({self.times.size}, {self.grid.n}), got {self.samples.shape}"
            )
        if np.any(np.diff(self.times) <= 0):
            raise ObservableError("Snapshot times must be strictly increasing")
        return self

    @classmethod
    def from_coeffs(cls, grid: Grid, times: np.ndarray, coeffs: np.ndarray) -> "TrajectoryView":
        return cls(grid=grid, times=times, samples=to_samples(coeffs, grid))

    @property
    def coeffs(self) -> np.ndarray:
        return to_coeffs(self.samples, self.grid)

    @property
    def horizon(self) -> float:
        """T = t_last - t_first"""
        return float(self.times[-1] - self.times[0])

    @property
    def is_uniform(self) -> bool:
        steps = np.diff(self.times)
        return steps.size == 0 or bool(np.allclose(steps, steps[0], rtol=1e-9, atol=0.0))

    def window(self, t_max: float) -> "TrajectoryView":
        """Snapshots with t <= t_max"""
        keep = self.times <= t_max + 1e-12 * max(1.0, abs(t_max))
        return TrajectoryView(grid=self.grid, times=self.times[keep], samples=self.samples[keep])

    def __add__(self, other: "TrajectoryView") -> "TrajectoryView":
        self.grid.require_same(other.grid)
        if not np.array_equal(self.times, other.times):
            raise ObservableError("Trajectories live on different time lattices")
        return TrajectoryView(grid=self.grid, times=self.times, samples=self.samples + other.samples)

    def __mul__(self, scalar: float) -> "TrajectoryView":
        return TrajectoryView(grid=self.grid, times=self.times, samples=scalar * self.samples)

    __rmul__ = __mul__
