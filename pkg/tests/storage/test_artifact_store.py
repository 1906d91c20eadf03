import json
import math
import pytest
import numpy as np
import pandas as pd

from gkdvlab.spectral import Grid
from gkdvlab.storage.artifact_store import (
    SNAPSHOT_MAGIC,
    ArtifactExistsError,
    ArtifactStore,
    ArtifactStoreError,
    CorruptSnapshotError,
    decode_snapshots,
    dumps_json,
    encode_snapshots,
)

@pytest.fixture
def store(tmp_path):
    """Create an ArtifactStore in a temporary directory"""
    return ArtifactStore(base_path=str(tmp_path / "run"))

@pytest.fixture
def grid():
    return Grid(n=8, length=4.0)

# Configuration Tests
def test_env_var_output_dir(tmp_path, monkeypatch):
    """Test GKDV_OUTPUT_DIR sets the default directory"""
    monkeypatch.setenv("GKDV_OUTPUT_DIR", str(tmp_path / "from_env"))
    store = ArtifactStore()
    assert store.base_path == tmp_path / "from_env"
    assert store.base_path.is_dir()

def test_constructor_overrides_env_var(tmp_path, monkeypatch):
    """Test an explicit base path wins over the environment"""
    monkeypatch.setenv("GKDV_OUTPUT_DIR", str(tmp_path / "from_env"))
    store = ArtifactStore(base_path=str(tmp_path / "explicit"))
    assert store.base_path == tmp_path / "explicit"

def test_unwritable_directory_raises(tmp_path):
    """Test a directory that cannot be created raises ArtifactStoreError"""
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ArtifactStoreError):
        ArtifactStore(base_path=str(blocker / "sub"))

# Snapshot Tests
def test_snapshot_layout(grid):
    """Test the SGKV1 header and body layout"""
    samples = np.arange(16, dtype=float).reshape(2, 8)
    content = encode_snapshots(grid, samples)
    assert content[:5] == SNAPSHOT_MAGIC
    assert int.from_bytes(content[5:13], "little") == 8
    assert np.frombuffer(content[13:21], dtype="<f8")[0] == 4.0
    assert len(content) == 21 + 16 * 8
    assert np.frombuffer(content[21:29], dtype="<f8")[0] == 0.0

def test_snapshot_read_back(store, grid, rng):
    """Test snapshots read back bit-exactly with their grid"""
    samples = rng.normal(size=(3, 8))
    store.write_snapshots("u.sgkv", grid, samples)
    read_grid, read = store.read_snapshots("u.sgkv")
    assert read_grid.n == 8
    assert read_grid.length == 4.0
    assert np.array_equal(read, samples)

def test_single_snapshot_promoted(grid):
    """Test a single field is written as one row"""
    _, read = decode_snapshots(encode_snapshots(grid, np.ones(8)))
    assert read.shape == (1, 8)

def test_snapshot_shape_mismatch(grid):
    """Test rows must match the grid size"""
    with pytest.raises(ArtifactStoreError):
        encode_snapshots(grid, np.ones((2, 6)))

@pytest.mark.parametrize("content", [
    b"",
    b"XXXXX" + bytes(16),
    SNAPSHOT_MAGIC + np.int64(7).tobytes() + np.float64(1.0).tobytes(),
    SNAPSHOT_MAGIC + np.int64(8).tobytes() + np.float64(-1.0).tobytes(),
    SNAPSHOT_MAGIC + np.int64(8).tobytes() + np.float64(1.0).tobytes() + bytes(12),
])
def test_corrupt_snapshots(content):
    """Test bad magic, header or body length is rejected"""
    with pytest.raises(CorruptSnapshotError):
        decode_snapshots(content)

# Text Output Tests
def test_csv_is_bit_stable(store):
    """Test CSV floats carry 17 significant digits and read back exactly"""
    table = pd.DataFrame({"t": [0.0, 0.1], "mass [u^2]": [1.0 / 3.0, math.pi]})
    path = store.write_csv("series.csv", table)
    text = path.read_text()
    assert text.splitlines()[0] == "t,mass [u^2]"
    assert "0.33333333333333331" in text
    assert store.read_csv("series.csv")["mass [u^2]"].tolist() == [1.0 / 3.0, math.pi]

def test_json_sorted_with_numpy_values(store):
    """Test JSON keys are sorted and numpy values are converted"""
    store.write_json("report.json", {"z": np.float64(1.5), "a": np.arange(3), "pass": True})
    text = store.path("report.json").read_text()
    assert text.index('"a"') < text.index('"pass"') < text.index('"z"')
    assert store.read_json("report.json") == {"a": [0, 1, 2], "pass": True, "z": 1.5}

def test_dumps_json_non_finite():
    """Test infinities survive as JSON literals"""
    assert json.loads(dumps_json({"t": float("inf")}))["t"] == float("inf")

def test_refuses_overwrite(store):
    """Test existing artifacts are protected unless overwrite is set"""
    store.write_json("a.json", {})
    with pytest.raises(ArtifactExistsError):
        store.write_json("a.json", {"b": 1})
    store.overwrite = True
    store.write_json("a.json", {"b": 1})
    assert store.read_json("a.json") == {"b": 1}

def test_missing_artifact(store):
    """Test reading a missing file raises ArtifactStoreError"""
    with pytest.raises(ArtifactStoreError):
        store.read_json("missing.json")

# Inventory Tests
def test_inventory_hashes_everything_but_manifest(store, grid):
    """Test the inventory lists sha256 digests of data files, sorted"""
    store.write_json("b/report.json", {"x": 1})
    store.write_snapshots("a.sgkv", grid, np.zeros(8))
    store.write_json(ArtifactStore.MANIFEST_NAME, {})
    inventory = store.inventory()
    assert list(inventory) == ["a.sgkv", "b/report.json"]
    assert all(len(digest) == 64 for digest in inventory.values())

def test_identical_content_identical_hash(tmp_path):
    """Test equal data in two stores hashes identically"""
    digests = []
    for name in ("one", "two"):
        store = ArtifactStore(base_path=str(tmp_path / name))
        store.write_csv("x.csv", pd.DataFrame({"t": [0.1, 0.2]}))
        digests.append(store.sha256("x.csv"))
    assert digests[0] == digests[1]
