"""Run output storage: CSV tables, JSON reports and SGKV1 snapshot files"""
import hashlib
import json
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from gkdvlab.spectral.grid import Grid
from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)

SNAPSHOT_MAGIC = b"SGKV1"
SNAPSHOT_HEADER_SIZE = len(SNAPSHOT_MAGIC) + 16
CSV_FLOAT_FORMAT = "%.17g"

class ArtifactStoreError(Exception):
    """Base exception for artifact store errors"""
    pass

class ArtifactExistsError(ArtifactStoreError):
    """Raised when writing would overwrite an existing artifact"""
    pass

class CorruptSnapshotError(ArtifactStoreError, ValueError):
    """Raised when a snapshot file has a bad magic, header or length"""
    pass

def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")

def dumps_json(data: Any) -> str:
    """Sorted, indented JSON; non-finite floats are written as NaN / Infinity."""
    return json.dumps(data, sort_keys=True, indent=2, default=_json_default) + "\n"

def encode_snapshots(grid: Grid, samples: np.ndarray) -> bytes:
    """SGKV1: magic, n (int64), L (float64), then row-major float64 samples, all little-endian."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[np.newaxis]
    if samples.ndim != 2 or samples.shape[1] != grid.n:
        raise ArtifactStoreError(f"Snapshots must have shape (n_snapshots, {grid.n}), got {samples.shape}")
    header = SNAPSHOT_MAGIC + np.int64(grid.n).astype("<i8").tobytes() + np.float64(grid.length).astype("<f8").tobytes()
    return header + np.ascontiguousarray(samples, dtype="<f8").tobytes()

def decode_snapshots(content: bytes) -> Tuple[Grid, np.ndarray]:
    """Inverse of encode_snapshots.

    Raises:
        CorruptSnapshotError: wrong magic, bad header, or a body that is not a whole number of snapshots
    """
    if len(content) < SNAPSHOT_HEADER_SIZE or not content.startswith(SNAPSHOT_MAGIC):
        raise CorruptSnapshotError("Not an SGKV1 snapshot file")
    offset = len(SNAPSHOT_MAGIC)
    n = int(np.frombuffer(content, dtype="<i8", count=1, offset=offset)[0])
    length = float(np.frombuffer(content, dtype="<f8", count=1, offset=offset + 8)[0])
    body = len(content) - SNAPSHOT_HEADER_SIZE
    if n < 8 or n % 2 or not (math.isfinite(length) and length > 0):
        raise CorruptSnapshotError(f"Invalid SGKV1 header: n={n}, L={length}")
    if body % (8 * n):
        raise CorruptSnapshotError(f"SGKV1 body of {body} bytes is not a whole number of {n}-point snapshots")
    samples = np.frombuffer(content, dtype="<f8", offset=SNAPSHOT_HEADER_SIZE).reshape(-1, n)
    return Grid(n=n, length=length), samples.astype(np.float64)

class ArtifactStore:
    """Output directory of one run.

    Files are addressed by names relative to the base directory. Text outputs
    are written with fixed formatting so that identical data gives identical
    bytes, and `inventory` hashes every file for the run manifest.
    """

    MANIFEST_NAME = "manifest.json"

    def __init__(self, base_path: Optional[str] = None, overwrite: bool = False):
        """Initialize the store

        Args:
            base_path: Output directory. If not provided, uses the GKDV_OUTPUT_DIR
                       env var or defaults to ./gkdv-runs
            overwrite: Allow replacing existing files
        """
        self.base_path = Path(base_path).expanduser() if base_path else self.get_default_path()
        self.overwrite = overwrite
        self._ensure_directory()
        logger.debug(f"Initialized ArtifactStore at {self.base_path} (overwrite={overwrite})")

    @classmethod
    def get_default_path(cls) -> Path:
        """Get the default output directory based on environment or defaults"""
        env_path = os.getenv("GKDV_OUTPUT_DIR")
        if env_path:
            return Path(env_path).expanduser()
        return Path.cwd() / "gkdv-runs"

    def _ensure_directory(self) -> None:
        try:
            self.base_path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"Failed to create output directory {self.base_path}: {e}")
            raise ArtifactStoreError(f"Output directory initialization failed: {e}")

    def path(self, name: str) -> Path:
        return self.base_path / name

    def _target(self, name: str) -> Path:
        target = self.path(name)
        if target.exists() and not self.overwrite:
            raise ArtifactExistsError(f"Refusing to overwrite {target}")
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def _write(self, name: str, content: bytes) -> Path:
        target = self._target(name)
        target.write_bytes(content)
        logger.debug(f"Wrote {name} ({len(content)} bytes)")
        return target

    def write_csv(self, name: str, table: pd.DataFrame) -> Path:
        text = table.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return self._write(name, text.encode("utf-8"))

    def write_json(self, name: str, data: Any) -> Path:
        return self._write(name, dumps_json(data).encode("utf-8"))

    def write_snapshots(self, name: str, grid: Grid, samples: np.ndarray) -> Path:
        return self._write(name, encode_snapshots(grid, samples))

    def _existing(self, name: str) -> Path:
        source = self.path(name)
        if not source.is_file():
            raise ArtifactStoreError(f"Artifact {name} not found at {source}")
        return source

    def _read(self, name: str) -> bytes:
        return self._existing(name).read_bytes()

    def read_csv(self, name: str) -> pd.DataFrame:
        return pd.read_csv(self._existing(name), float_precision="round_trip")

    def read_json(self, name: str) -> Any:
        return json.loads(self._read(name).decode("utf-8"))

    def read_snapshots(self, name: str) -> Tuple[Grid, np.ndarray]:
        return decode_snapshots(self._read(name))

    def sha256(self, name: str) -> str:
        return hashlib.sha256(self._read(name)).hexdigest()

    def list_files(self) -> List[str]:
        """Relative names of every file, sorted"""
        return sorted(p.relative_to(self.base_path).as_posix() for p in self.base_path.rglob("*") if p.is_file())

    def inventory(self) -> Dict[str, str]:
        """name -> sha256 for every file except the manifest"""
        return {name: self.sha256(name) for name in self.list_files() if name != self.MANIFEST_NAME}
