"""Simulation configuration and state models"""
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field as ModelField, field_validator, model_validator

from gkdvlab.dynamics.nonlinear import check_pad_factor, default_pad_factor
from gkdvlab.spectral.grid import Field, Grid

InitialKind = Literal["zero", "gaussian", "soliton", "custom-table"]
Scheme = Literal["strang", "exp-euler"]

class InitialDataConfig(BaseModel):
    """Initial data description.

    gaussian: amplitude * exp(-(x - center)^2 / (2 width^2));
    soliton: travelling wave of speed `speed` centred at `center`;
    custom-table: explicit samples `values` (length n).
    When `target_norm` is set the field is rescaled so that its
    H^`target_sigma` norm equals it.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: InitialKind = "gaussian"
    amplitude: float = 1.0
    width: float = ModelField(default=1.0, gt=0)
    center: float = 0.0
    speed: float = ModelField(default=1.0, gt=0)
    values: Optional[List[float]] = None
    target_norm: Optional[float] = ModelField(default=None, ge=0)
    target_sigma: float = 0.0

    @model_validator(mode="after")
    def validate_table(self):
        if self.kind == "custom-table" and not self.values:
            raise ValueError("custom-table initial data needs 'values'")
        return self

class SimConfig(BaseModel):
    """Everything needed to reproduce one trajectory"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    k: Literal[2, 3] = 2
    mu: Literal[1, -1] = 1
    n: int = 256
    L: float = ModelField(default=100.0, gt=0)
    dt: float = 1e-3
    T: float = 1.0
    scheme: Scheme = "strang"
    pad_factor: Optional[int] = None
    seed: int = ModelField(default=0, ge=0)
    save_every: int = ModelField(default=1, ge=1)
    nonlinear: bool = True
    cfl: float = ModelField(default=1.0, gt=0)
    blowup_threshold: float = ModelField(default=1e8, gt=0)
    initial: InitialDataConfig = ModelField(default_factory=InitialDataConfig)

    @model_validator(mode="before")
    @classmethod
    def fill_pad_factor(cls, data):
        if isinstance(data, dict) and data.get("pad_factor") is None:
            data = dict(data)
            data["pad_factor"] = default_pad_factor(data.get("k", 2))
        return data

    @field_validator("n")
    def validate_n(cls, v: int) -> int:
        if v < 8 or v % 2:
            raise ValueError(f"n must be an even integer >= 8, got {v}")
        return v

    @field_validator("dt")
    def validate_dt(cls, v: float) -> float:
        if not v > 0:
            raise ValueError(f"dt must be positive, got {v}")
        return v

    @model_validator(mode="after")
    def validate_physics(self):
        if self.T < self.dt:
            raise ValueError(f"Horizon T={self.T} must be at least dt={self.dt}")
        check_pad_factor(self.k, self.pad_factor)
        return self

    @property
    def grid(self) -> Grid:
        return Grid(n=self.n, length=self.L)

    @property
    def n_steps(self) -> int:
        """Step count whose final time lies within dt/2 of T"""
        return max(1, int(round(self.T / self.dt)))

    def with_dt(self, dt: float) -> "SimConfig":
        """Same run at another step size, keeping the saved times when possible"""
        ratio = self.dt / dt
        save_every = self.save_every
        if ratio >= 1 and abs(ratio - round(ratio)) < 1e-9:
            save_every = self.save_every * int(round(ratio))
        return self.model_copy(update={"dt": dt, "save_every": save_every})

class State(BaseModel):
    """Solution u at time t, with the tracked stochastic convolution v when available"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    t: float
    u: Field
    v: Optional[Field] = None
