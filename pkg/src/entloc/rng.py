"""Counter-based random streams.

Every random draw in the package comes from a Philox generator whose key is
``(seed, stream)`` and whose counter starts at the sample index. A sample's
randomness therefore depends only on ``(seed, stream, index)``, never on the
order in which samples are processed or on the number of workers.
"""

import numpy as np

_MASK64 = (1 << 64) - 1

# stream ids
STATES = 1
MODEL = 2
SHUFFLE = 3
SUPPORT = 4


def keyed_rng(seed, stream=0, index=0):
    """Return an independent ``numpy.random.Generator`` for ``(seed, stream, index)``."""
    if index < 0:
        raise ValueError("index must be non-negative")
    key = np.array([int(seed) & _MASK64, int(stream) & _MASK64], dtype=np.uint64)
    # the index sits in the top counter word so draws inside one sample advance
    # the low word without ever reaching another sample's counter range
    counter = np.array([0, 0, 0, int(index) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def as_rng(rng):
    """Coerce ``None``/int/Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng()
    return keyed_rng(int(rng))
