import zlib

import numpy as np


def sub_seed(seed: int, name: str) -> int:
    """Derive a stable integer seed for the named stage from a base seed."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(zlib.crc32(name.encode()),))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def make_rng(seed: int, name: str | None = None) -> np.random.Generator:
    if name is not None:
        seed = sub_seed(seed, name)
    return np.random.default_rng(seed)
