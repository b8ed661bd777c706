"""Exclusive feature bundling.

Features that are (nearly) never nonzero on the same row share one column;
member ``j`` is stored as ``offset[j] + value`` so members occupy disjoint
value ranges. Operates on non-negative matrices (raw counts or bin indices).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np


def conflict_rate(a: np.ndarray, b: np.ndarray) -> float:
    """Rows where both are nonzero over rows where either is (0 if neither ever is)."""
    either = np.count_nonzero(a | b)
    return np.count_nonzero(a & b) / either if either else 0.0


@dataclass
class Bundling:
    bundles: List[List[int]]
    offsets: np.ndarray      # per original feature
    max_values: np.ndarray   # per original feature
    bundle_of: np.ndarray    # per original feature -> bundle index

    @property
    def n_features(self) -> int:
        return len(self.offsets)

    def bundle_widths(self) -> List[int]:
        """Number of distinct encoded values each bundle column can take."""
        return [int(self.offsets[m[-1]] + self.max_values[m[-1]] + 1) for m in self.bundles]

    def encode(self, X: np.ndarray) -> np.ndarray:
        """Pack ``X`` column-wise. On conflicting rows the earliest member wins."""
        X = np.asarray(X)
        out = np.zeros((X.shape[0], len(self.bundles)), dtype=np.int64 if X.dtype.kind in "iu" else np.float64)
        for k, members in enumerate(self.bundles):
            col = out[:, k]
            for j in members:
                take = (X[:, j] != 0) & (col == 0)
                col[take] = X[take, j] + self.offsets[j]
        return out

    def decode(self, bundled: np.ndarray, feature: int) -> np.ndarray:
        """Recover one original column (exact when the bundle has no conflicts)."""
        v = np.asarray(bundled)[:, self.bundle_of[feature]]
        lo = self.offsets[feature]
        inside = (v > lo) & (v <= lo + self.max_values[feature])
        return np.where(inside, v - lo, 0)


def efb_bundle(X: np.ndarray, conflict_threshold: float = 0.0):
    """Greedy bundling by descending nonzero count.

    Returns ``(bundles, bundled_matrix, bundling)`` where ``bundling`` carries the
    offset encoding.
    """
    if not 0.0 <= conflict_threshold <= 1.0:
        raise ValueError("conflict threshold must lie in [0, 1]")
    X = np.asarray(X)
    if X.size and X.min() < 0:
        raise ValueError("feature bundling needs non-negative values")
    nz = X != 0
    n_features = X.shape[1]
    order = sorted(range(n_features), key=lambda j: (-int(nz[:, j].sum()), j))
    bundles: List[List[int]] = []
    for j in order:
        for members in bundles:
            if all(conflict_rate(nz[:, j], nz[:, m]) <= conflict_threshold for m in members):
                members.append(j)
                break
        else:
            bundles.append([j])
    max_values = X.max(axis=0) if X.shape[0] else np.zeros(n_features)
    offsets = np.zeros(n_features, dtype=max_values.dtype)
    bundle_of = np.zeros(n_features, dtype=np.int64)
    for k, members in enumerate(bundles):
        acc = 0
        for j in members:
            offsets[j] = acc
            bundle_of[j] = k
            acc += max_values[j] + 1
    bundling = Bundling(bundles, offsets, max_values, bundle_of)
    return bundles, bundling.encode(X), bundling
