"""Counter-based random substreams.

Every stochastic operation in this package derives its randomness from
(seed, *key) through a SeedSequence, so item i of a Monte-Carlo loop gets
the same draws no matter which order items are evaluated in, how many
threads run, or whether the loop is later extended past i.
"""

from __future__ import annotations

import numpy as np

# channel tags keeping unrelated draw streams of one operation disjoint
CH_ROW = 1
CH_SECANT = 2
CH_MAP = 3
CH_TRIAL = 4
CH_MU = 5
CH_BATCH = 6


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the (seed, *key) slot."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def child_seed(seed: int, *key: int) -> int:
    """Derived integer seed for APIs that take a seed rather than a Generator."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
