"""Run output storage"""
from .artifact_store import (
    CSV_FLOAT_FORMAT,
    SNAPSHOT_MAGIC,
    ArtifactExistsError,
    ArtifactStore,
    ArtifactStoreError,
    CorruptSnapshotError,
    decode_snapshots,
    dumps_json,
    encode_snapshots,
)
