"""Seed derivation and serializable random streams.

Every random stream in the package is a :class:`numpy.random.Generator`
backed by PCG64. Child seeds are derived by hashing integer tuples through
:class:`numpy.random.SeedSequence`, so a stream depends only on the
numbers that name it, never on how many draws happened elsewhere.
Gaussian variates come from ``Generator.standard_normal`` (ziggurat), whose
output sequence is fixed for a given seed and numpy release.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(*keys):
    """Hash a tuple of non-negative integers into one 64-bit seed."""
    for k in keys:
        if int(k) < 0:
            raise ValueError(f"seed keys must be non-negative, got {k}")
    ss = np.random.SeedSequence([int(k) & MASK64 for k in keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(*keys):
    """A fresh PCG64 generator named by ``keys``."""
    ss = np.random.SeedSequence([int(k) & MASK64 for k in keys])
    return np.random.Generator(np.random.PCG64(ss))


def rng_state(rng):
    """JSON-safe snapshot of a generator's state."""
    return rng.bit_generator.state


def rng_from_state(state):
    if state.get("bit_generator") != "PCG64":
        raise ValueError(f"unsupported bit generator {state.get('bit_generator')!r}")
    bg = np.random.PCG64()
    bg.state = state
    return np.random.Generator(bg)
