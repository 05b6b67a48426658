"""Seeded, portable mini-batch sampling.

All solvers draw their activation sets through the helpers here so that a
given seed reproduces the same run bit for bit, and so that two solvers
fed the same seed consume identical random streams (the basis of the
simplified-scheme equivalence checks).
"""

import numpy as np


def make_rng(seed):
    """A named, seedable generator with a platform-independent stream."""
    return np.random.Generator(np.random.PCG64(seed))


def sample_without_replacement(rng, pool, k):
    """First k entries of a partial Fisher-Yates shuffle of pool.

    pool is permuted in place for the first k slots and restored before
    returning, so one preallocated index buffer serves every iteration.
    When k equals the pool size the full pool is returned in order and no
    randomness is consumed (a deterministic full batch).
    """
    n = pool.shape[0]
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= %d, got %d" % (n, k))
    if k == n:
        return pool.copy()
    u = rng.random(k)
    swaps = np.empty(k, dtype=np.int64)
    for i in range(k):
        j = i + int(u[i] * (n - i))
        swaps[i] = j
        if j != i:
            pool[i], pool[j] = pool[j], pool[i]
    out = pool[:k].copy()
    for i in range(k - 1, -1, -1):
        j = swaps[i]
        if j != i:
            pool[i], pool[j] = pool[j], pool[i]
    return out
