"""Gradient-based one-side sampling."""
from __future__ import annotations

import math
from typing import Tuple

import numpy as np

from .objective import GradientState


def _ceil_frac(frac: float, n: int) -> int:
    # round first so that e.g. 0.3 * 10 counts as 3, not 4
    return min(n, math.ceil(round(frac * n, 9)))


def goss_sample(grads: GradientState | np.ndarray, top_rate: float, other_rate: float,
                seed=None) -> Tuple[np.ndarray, np.ndarray]:
    """Keep the ``ceil(a*n)`` largest-|g| samples, draw ``ceil(b*n)`` of the rest.

    Returns ascending row indices and matching weights: 1 for the kept set and
    ``(1 - a) / b`` for the drawn set. Ties in |g| go to the lower index.
    ``seed`` may be anything :func:`numpy.random.default_rng` accepts.
    """
    if not (0.0 <= top_rate <= 1.0 and 0.0 <= other_rate <= 1.0):
        raise ValueError("GOSS rates must lie in [0, 1]")
    if top_rate + other_rate > 1.0 + 1e-12:
        raise ValueError(f"GOSS rates sum to {top_rate + other_rate} > 1")
    g = grads.grad if isinstance(grads, GradientState) else np.asarray(grads)
    n = len(g)
    order = np.argsort(-np.abs(g), kind="stable")
    n_top = _ceil_frac(top_rate, n)
    top = order[:n_top]
    rest = order[n_top:]
    n_other = min(len(rest), _ceil_frac(other_rate, n)) if other_rate > 0 else 0
    if n_other:
        rng = np.random.default_rng(seed)
        drawn = rng.choice(rest, size=n_other, replace=False)
    else:
        drawn = np.empty(0, dtype=np.int64)
    rows = np.concatenate([top, drawn]).astype(np.int64)
    weights = np.concatenate([np.ones(len(top)), np.full(len(drawn), (1.0 - top_rate) / other_rate if n_other else 1.0)])
    order = np.argsort(rows, kind="stable")
    return rows[order], weights[order]
