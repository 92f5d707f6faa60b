"""Reproducible random substreams.

Every random draw in the package comes from a Philox4x64 counter-based
generator keyed by ``SeedSequence(seed, spawn_key=(domain, index))``.  The
key hashes the base seed together with a stream domain and an index (sample
path, Monte-Carlo chunk), so a stream's content depends only on that triple
and never on how work is scheduled across workers.
"""

import numpy as np

ENV_PATHS = 0
MC_CHUNKS = 1


def substream(seed: int, domain: int, index: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(domain), int(index)))
    return np.random.Generator(np.random.Philox(ss))


def path_stream(seed: int, path: int) -> np.random.Generator:
    return substream(seed, ENV_PATHS, path)
