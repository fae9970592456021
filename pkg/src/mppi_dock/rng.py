"""Counter-based random substreams.

Every random draw in a run comes from a Philox stream keyed by the run seed
plus a tuple of integer coordinates (purpose tag, step index, ...), so the
numbers a consumer sees never depend on call order elsewhere or on how work
is split between workers.
"""

from __future__ import annotations

import numpy as np

# purpose tags
LIDAR = 1
PERCEPTION = 2
MPPI = 3


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``."""
    if seed < 0 or any(k < 0 for k in keys):
        raise ValueError("seed and substream keys must be non-negative")
    ss = np.random.SeedSequence([int(seed), *map(int, keys)])
    return np.random.Generator(np.random.Philox(ss))
