from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SparseVector:
    """Sorted unique ``indices`` with matching non-zero ``values``."""

    indices: np.ndarray
    values: np.ndarray
    length: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-d and the same length")
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= self.length):
            raise ValueError("indices must be strictly increasing and within range")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def empty(cls, length):
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0), length)

    @classmethod
    def from_pairs(cls, indices, values, length):
        idx = np.asarray(indices, dtype=np.int64)
        val = np.asarray(values, dtype=np.float64)
        order = np.argsort(idx, kind="stable")
        return cls(idx[order], val[order], length)

    def __len__(self):
        return self.indices.size

    def dense(self, length=None):
        out = np.zeros(self.length if length is None else length)
        keep = self.indices < out.size
        out[self.indices[keep]] = self.values[keep]
        return out


def top_k(v, K):
    """The ``K`` largest-magnitude non-zero entries of ``v``; ties keep the lower index."""
    v = np.asarray(v, dtype=np.float64)
    if K > v.size:
        raise ValueError(f"K={K} exceeds vector length {v.size}")
    order = np.lexsort((np.arange(v.size), -np.abs(v)))[:K]
    order = order[v[order] != 0.0]
    order.sort()
    return SparseVector(order, v[order], v.size)
