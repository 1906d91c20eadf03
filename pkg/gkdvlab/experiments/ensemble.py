"""Monte Carlo ensembles of independent trajectories.

Trajectories are advanced in fixed chunks of `batch_size` consecutive stream
ids. Chunks run on worker threads (numpy releases the GIL inside FFTs) and are
reassembled in stream order, so results never depend on the thread count.
"""
import asyncio
from typing import Any, Callable, Dict, List, Optional, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field as ModelField, field_validator

from gkdvlab.dynamics.config import SimConfig
from gkdvlab.dynamics.initial_data import initial_field
from gkdvlab.dynamics.integrators import integrate_batch
from gkdvlab.noise.covariance import CovarianceOperator
from gkdvlab.noise.rng import make_streams
from gkdvlab.observables.registry import ObservableContext, default_registry
from gkdvlab.spectral.grid import Field
from gkdvlab.experiments.stats import confidence_interval, sample_mean, standard_error
from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)

R = TypeVar("R")

async def map_chunks_async(
    fn: Callable[[List[int]], R],
    n_items: int,
    batch_size: int,
    threads: int = 1
) -> List[R]:
    """Apply fn to consecutive id chunks on at most `threads` worker threads, results in chunk order."""
    semaphore = asyncio.Semaphore(max(1, threads))
    chunks = [list(range(start, min(start + batch_size, n_items))) for start in range(0, n_items, batch_size)]

    async def run(index: int, ids: List[int]) -> R:
        async with semaphore:
            result = await asyncio.to_thread(fn, ids)
            logger.debug(f"Chunk {index + 1}/{len(chunks)} done (ids {ids[0]}..{ids[-1]})")
            return result

    return await asyncio.gather(*[run(i, ids) for i, ids in enumerate(chunks)])

def map_chunks(fn: Callable[[List[int]], R], n_items: int, batch_size: int, threads: int = 1) -> List[R]:
    return asyncio.run(map_chunks_async(fn, n_items, batch_size, threads))

class EnsembleSpec(BaseModel):
    """An ensemble: trajectory i is driven by stream (master_seed, i)"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    base: SimConfig
    n_traj: int = ModelField(ge=2)
    observables: List[str] = ModelField(default_factory=lambda: ["mass", "hamiltonian"])
    master_seed: int = ModelField(default=0, ge=0)
    batch_size: int = ModelField(default=64, ge=1)

    @field_validator("observables")
    def validate_observables(cls, v: List[str]) -> List[str]:
        registry = default_registry()
        unknown = [key for key in v if not registry.has_observable(key)]
        if unknown:
            raise ValueError(f"Unknown observables {unknown}; available: {registry.list_observables()}")
        if not v:
            raise ValueError("An ensemble needs at least one observable")
        return v

class EnsembleResult(BaseModel):
    """Per-trajectory observable tables plus their reduction.

    values[key] has shape (n_traj, n_times), rows ordered by stream id; entries
    at and after a trajectory's blow-up are NaN and that row's blow-up time is
    recorded in blowup_times.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    spec: EnsembleSpec
    times: np.ndarray
    values: Dict[str, np.ndarray]
    blowup_times: np.ndarray
    headers: Dict[str, str]

    @property
    def n_traj(self) -> int:
        return len(self.blowup_times)

    @property
    def blowup_fraction(self) -> float:
        return float(np.mean(np.isfinite(self.blowup_times)))

    @property
    def survivors(self) -> np.ndarray:
        return ~np.isfinite(self.blowup_times)

    def mean(self, key: str) -> np.ndarray:
        return sample_mean(self.values[key], axis=0)

    def se(self, key: str) -> np.ndarray:
        return standard_error(self.values[key], axis=0)

    def reduced_table(self) -> pd.DataFrame:
        """t, then <key>_mean, <key>_se, <key>_ci_low, <key>_ci_high per observable."""
        columns: Dict[str, Any] = {"t": self.times}
        for key in self.spec.observables:
            low, high = confidence_interval(self.values[key], axis=0)
            columns[f"{key}_mean"] = self.mean(key)
            columns[f"{key}_se"] = self.se(key)
            columns[f"{key}_ci_low"] = low
            columns[f"{key}_ci_high"] = high
        return pd.DataFrame(columns)

    def trajectory_table(self, index: int) -> pd.DataFrame:
        """t plus one column per observable, headed with its units."""
        columns: Dict[str, Any] = {"t": self.times}
        for key in self.spec.observables:
            columns[self.headers[key]] = self.values[key][index]
        return pd.DataFrame(columns)

    def census(self) -> Dict[str, Any]:
        blown = np.flatnonzero(np.isfinite(self.blowup_times))
        return {
            "n_traj": self.n_traj,
            "n_blowup": int(blown.size),
            "blowup_fraction": self.blowup_fraction,
            "blowup_streams": [int(i) for i in blown],
        }

class _Chunk(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    times: np.ndarray
    values: Dict[str, np.ndarray]
    blowup_times: np.ndarray

def _run_chunk(spec: EnsembleSpec, phi: CovarianceOperator, u0: Field, ids: List[int]) -> _Chunk:
    cfg = spec.base
    registry = default_registry()
    context = ObservableContext(grid=cfg.grid, phi=phi, k=cfg.k, mu=cfg.mu, pad_factor=cfg.pad_factor)
    times: List[float] = []
    rows: Dict[str, List[np.ndarray]] = {key: [] for key in spec.observables}

    def on_snapshot(i, t, coeffs, v, alive):
        times.append(t)
        for key in spec.observables:
            rows[key].append(np.where(alive, registry.evaluate(key, coeffs, context), np.nan))

    blowups = integrate_batch(cfg, phi, make_streams(spec.master_seed, ids), u0, on_snapshot)
    return _Chunk(
        times=np.array(times),
        values={key: np.array(rows[key]).T for key in spec.observables},
        blowup_times=blowups
    )

async def run_ensemble_async(
    spec: EnsembleSpec,
    phi: CovarianceOperator,
    u0: Optional[Field] = None,
    threads: int = 1
) -> EnsembleResult:
    u0 = initial_field(spec.base) if u0 is None else u0
    logger.info(
        f"Ensemble of {spec.n_traj} trajectories, seed {spec.master_seed}, "
        f"{spec.base.n_steps} steps of {spec.base.dt:g} ({spec.base.scheme}), threads={threads}"
    )
    chunks = await map_chunks_async(
        lambda ids: _run_chunk(spec, phi, u0, ids), spec.n_traj, spec.batch_size, threads
    )
    registry = default_registry()
    result = EnsembleResult(
        spec=spec,
        times=chunks[0].times,
        values={key: np.concatenate([c.values[key] for c in chunks]) for key in spec.observables},
        blowup_times=np.concatenate([c.blowup_times for c in chunks]),
        headers={key: registry.header(key) for key in spec.observables}
    )
    if result.blowup_fraction > 0:
        logger.warning(f"{result.census()['n_blowup']} of {spec.n_traj} trajectories blew up")
    return result

def run_ensemble(
    spec: EnsembleSpec,
    phi: CovarianceOperator,
    u0: Optional[Field] = None,
    threads: int = 1
) -> EnsembleResult:
    """Run the ensemble; output depends on spec, phi and u0 only.

    Blow-ups are counted in the result, never raised.
    """
    return asyncio.run(run_ensemble_async(spec, phi, u0, threads))

def final_increments(result: EnsembleResult, key: str) -> np.ndarray:
    """value(T) - value(0) for the surviving trajectories"""
    values = result.values[key][result.survivors]
    return values[:, -1] - values[:, 0]

def integrated(result: EnsembleResult, key: str) -> np.ndarray:
    """int_0^T value dt by the trapezoid rule, per surviving trajectory"""
    return np.trapezoid(result.values[key][result.survivors], x=result.times, axis=-1)
