"""Counter-based random streams.

Every stream is a Philox generator whose key is derived from the run seed and
an integer tuple naming the work unit (purpose, replication, row, ...). Draws
therefore do not depend on scheduling order or on the number of threads.
"""
import numpy as np

# purpose tags, kept stable so that files stay reproducible across versions
NOISE_GRID = 1
INCREMENT = 2
LIMIT = 3
FBS = 4
BOOTSTRAP = 5
CELLS = 6


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the work unit `key` under `seed`."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(key=ss.generate_state(2, np.uint64)))
