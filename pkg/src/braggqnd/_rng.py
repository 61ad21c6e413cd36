"""Counter-style splitmix64 streams for reproducible parallel trials.

Every trial gets its own seed derived from (master_seed, trial_index), so a
batch of trials produces the same draws no matter how the trials are chunked
or how many worker threads consume them.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """splitmix64 output function on a 64-bit integer."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def splitmix_next(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state by one step; returns (new_state, output)."""
    state = (state + GAMMA) & MASK64
    return state, mix64(state)


def trial_seed(master_seed: int, index: int) -> int:
    """Seed for one trial stream: output `index` of the master sequence."""
    return mix64((master_seed + (index + 1) * GAMMA) & MASK64)


def derive_seeds(master_seed: int, start: int, count: int) -> np.ndarray:
    """uint64 seeds for trials [start, start+count), as consumed by kernels."""
    if count < 0:
        raise ValueError("count must be >= 0")
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        out[i] = trial_seed(master_seed, start + i)
    return out


def uniform_from(state: int) -> tuple[int, float]:
    """One double in [0, 1) from the top 53 bits of the next output."""
    state, z = splitmix_next(state)
    return state, (z >> 11) * 2.0**-53
