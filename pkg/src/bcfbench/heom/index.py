"""Multi-index bookkeeping for truncated hierarchies."""

from math import comb

import numpy as np

__all__ = ["HierarchyIndexSet", "count_indices"]


def count_indices(n_slots, depth):
    """Number of non-negative integer vectors of length ``n_slots`` with sum <= depth."""
    return comb(depth + n_slots, n_slots)


def _compositions(n_slots, total):
    # all vectors of length n_slots summing to total, colex order
    if n_slots == 1:
        yield (total,)
        return
    for last in range(total + 1):
        for head in _compositions(n_slots - 1, total - last):
            yield head + (last,)


class HierarchyIndexSet:
    """Dense enumeration of ``{j : sum(j) <= depth}`` ordered by depth.

    Parameters
    ----------
    n_slots : int
        Length of each multi-index (``K`` for the generic hierarchy, ``K + 2``
        for the oscillator moments).
    depth : int
        Cutoff on the sum of entries.

    Attributes
    ----------
    indices : ndarray, shape (size, n_slots)
    up, down : ndarray, shape (n_slots, size)
        Ordinal of ``j + e_k`` / ``j - e_k`` or -1 when outside the set.
    """

    def __init__(self, n_slots, depth):
        if n_slots < 1:
            raise ValueError("n_slots must be >= 1")
        if depth < 0:
            raise ValueError("depth must be >= 0")
        self.n_slots = int(n_slots)
        self.depth = int(depth)
        rows = [c for d in range(depth + 1) for c in _compositions(n_slots, d)]
        self.indices = np.array(rows, dtype=np.int64).reshape(len(rows), n_slots)
        self._lookup = {r: i for i, r in enumerate(rows)}
        self.level = self.indices.sum(axis=1)
        size = len(rows)
        self.up = -np.ones((n_slots, size), dtype=np.int64)
        self.down = -np.ones((n_slots, size), dtype=np.int64)
        for i, r in enumerate(rows):
            for k in range(n_slots):
                if r[k] > 0:
                    lo = list(r)
                    lo[k] -= 1
                    j = self._lookup[tuple(lo)]
                    self.down[k, i] = j
                    self.up[k, j] = i

    def __len__(self):
        return len(self.indices)

    def __contains__(self, idx):
        return tuple(idx) in self._lookup

    def ordinal(self, idx):
        """Position of multi-index ``idx`` (KeyError if outside the set)."""
        return self._lookup[tuple(int(x) for x in idx)]

    def get(self, idx, default=-1):
        return self._lookup.get(tuple(int(x) for x in idx), default)
