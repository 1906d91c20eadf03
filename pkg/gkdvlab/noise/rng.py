"""Counter-based random streams, one per trajectory"""
from typing import List, Sequence, Tuple, Union

import numpy as np

class RngStream:
    """Philox stream keyed by (master_seed, stream_id).

    Each stream is single-owner mutable state. `counter` is the number of
    normals drawn so far, so a stream can be replayed to any position.
    """

    def __init__(self, master_seed: int, stream_id: int = 0):
        if master_seed < 0 or stream_id < 0:
            raise ValueError("master_seed and stream_id must be nonnegative")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        self.counter = 0
        self._generator = self._make_generator()

    def _make_generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(seq))

    def normal(self, size: Union[int, Tuple[int, ...]]) -> np.ndarray:
        """Standard normals, drawn in row-major order."""
        draws = self._generator.standard_normal(size)
        self.counter += draws.size
        return draws

    def reset(self) -> None:
        """Rewind to the start of the stream."""
        self.counter = 0
        self._generator = self._make_generator()

    def advance(self, n_draws: int) -> None:
        """Skip n_draws normals."""
        # Normals come from a rejection sampler, so skipping means drawing
        self.normal(n_draws)

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id}, counter={self.counter})"

def make_streams(master_seed: int, stream_ids: Sequence[int]) -> List[RngStream]:
    return [RngStream(master_seed, i) for i in stream_ids]
