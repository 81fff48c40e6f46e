import numpy as np


def child_seed(master, *keys) -> np.random.SeedSequence:
    """Independent, reproducible stream for ``(master, *keys)``."""
    return np.random.SeedSequence([int(master), *map(int, keys)])


def child_rng(master, *keys) -> np.random.Generator:
    return np.random.default_rng(child_seed(master, *keys))
