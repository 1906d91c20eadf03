import pytest
from pydantic import ValidationError

from gkdvlab.dynamics import InitialDataConfig, SimConfig

def test_defaults():
    """Test a minimal config fills documented defaults"""
    cfg = SimConfig(k=2, n=64, L=20.0, dt=0.01, T=0.5)
    assert cfg.mu == 1
    assert cfg.scheme == "strang"
    assert cfg.pad_factor == 2
    assert cfg.save_every == 1
    assert cfg.blowup_threshold == 1e8
    assert cfg.initial.kind == "gaussian"
    assert cfg.n_steps == 50
    assert cfg.grid.length == 20.0

def test_pad_default_for_quartic_products():
    """Test k = 3 defaults to pad factor 3"""
    assert SimConfig(k=3).pad_factor == 3

@pytest.mark.parametrize("update", [
    {"k": 5},
    {"mu": 0},
    {"n": 63},
    {"n": 4},
    {"dt": 0.0},
    {"dt": -1e-3},
    {"T": 1e-4, "dt": 1e-3},
    {"k": 3, "pad_factor": 2},
    {"scheme": "euler"},
    {"unknown_key": 1},
])
def test_rejects_invalid(update):
    """Test invalid or unknown settings are rejected"""
    with pytest.raises(ValidationError):
        SimConfig(**update)

def test_pad_factor_error_names_threshold():
    """Test the dealiasing error explains the threshold"""
    with pytest.raises(ValidationError) as info:
        SimConfig(k=3, pad_factor=2)
    assert "2.5" in str(info.value)

def test_with_dt_keeps_saved_times():
    """Test halving dt doubles the save stride"""
    cfg = SimConfig(dt=0.01, T=1.0, save_every=5)
    half = cfg.with_dt(0.005)
    assert half.dt == 0.005
    assert half.save_every == 10
    assert half.n_steps == 200

def test_custom_table_needs_values():
    """Test custom-table data requires explicit samples"""
    with pytest.raises(ValidationError):
        InitialDataConfig(kind="custom-table")

def test_configs_are_frozen():
    """Test configs are immutable"""
    cfg = SimConfig()
    with pytest.raises(ValidationError):
        cfg.dt = 0.5
