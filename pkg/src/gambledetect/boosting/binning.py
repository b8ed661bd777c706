"""Quantile histogram binning.

Each feature gets sorted cut points; ``bin(x)`` is the number of cuts strictly
below ``x``, so ``bin(x) <= b`` exactly when ``x <= cuts[b]``. NaN goes to a
dedicated missing bin at index ``max_bins``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np


def _cuts_for(column: np.ndarray, max_bins: int) -> np.ndarray:
    values = np.unique(column[~np.isnan(column)])
    if len(values) <= 1:
        return np.empty(0)
    if len(values) <= max_bins:
        lo, hi = values[:-1], values[1:]
        mid = lo + (hi - lo) / 2
        # guard against midpoints that round onto a neighbour
        return np.where((mid >= lo) & (mid < hi), mid, lo)
    qs = np.quantile(column[~np.isnan(column)], np.linspace(0.0, 1.0, max_bins + 1)[1:-1])
    cuts = np.unique(qs)
    return cuts[cuts < values[-1]]


@dataclass
class BinMapper:
    cuts: List[np.ndarray]
    max_bins: int

    @classmethod
    def fit(cls, X: np.ndarray, max_bins: int = 255) -> "BinMapper":
        if not 2 <= max_bins <= 255:
            raise ValueError("max_bins must be in [2, 255]")
        X = np.asarray(X, dtype=np.float64)
        return cls([_cuts_for(X[:, j], max_bins) for j in range(X.shape[1])], max_bins)

    @property
    def missing_bin(self) -> int:
        return self.max_bins

    @property
    def n_cuts(self) -> np.ndarray:
        return np.array([len(c) for c in self.cuts], dtype=np.int64)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape, dtype=np.uint8)
        for j, cuts in enumerate(self.cuts):
            col = X[:, j]
            b = np.searchsorted(cuts, col, side="left")
            b[np.isnan(col)] = self.missing_bin
            out[:, j] = b
        return out

    def threshold(self, feature: int, bin_index: int) -> float:
        cuts = self.cuts[feature]
        return float(cuts[bin_index]) if bin_index < len(cuts) else float("inf")
