"""Pure numpy implementations of the hot kernels."""

import numpy as np

_DENSE_LIMIT = 1 << 22


def subset_entropies(outcomes, probs, radices):
    """Shannon entropies (bits) of every marginal of a joint pmf.

    Args:
        outcomes: (N, n) integer array, one row per atom.
        probs: (N,) float array of atom probabilities.
        radices: (n,) alphabet sizes.

    Returns:
        Array of length 2**n; entry ``m`` is the entropy of the marginal on
        the systems whose bits are set in ``m`` (entry 0 is 0).
    """
    outcomes = np.asarray(outcomes, dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    radices = [int(r) for r in radices]
    n = len(radices)
    out = np.zeros(1 << n)
    total = 1
    for r in radices:
        total *= r
    if total <= _DENSE_LIMIT:
        dense = np.zeros(radices)
        np.add.at(dense, tuple(outcomes.T), probs)
        for mask in range(1, 1 << n):
            drop = tuple(i for i in range(n) if not (mask >> i) & 1)
            marg = dense.sum(axis=drop) if drop else dense
            p = marg[marg > 0]
            out[mask] = -np.dot(p, np.log2(p))
        return out
    for mask in range(1, 1 << n):
        cols = [i for i in range(n) if (mask >> i) & 1]
        _, inverse = np.unique(outcomes[:, cols], axis=0, return_inverse=True)
        marg = np.bincount(inverse.ravel(), weights=probs)
        p = marg[marg > 0]
        out[mask] = -np.dot(p, np.log2(p))
    return out
