"""Binary logistic loss: link, gradients, loss value."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def logistic(raw):
    raw = np.asarray(raw, dtype=np.float64)
    return np.exp(-np.logaddexp(0.0, -raw))


@dataclass(frozen=True)
class GradientState:
    """First and second derivatives of the loss w.r.t. the raw score."""
    grad: np.ndarray
    hess: np.ndarray

    def __len__(self) -> int:
        return len(self.grad)


def compute_gradients(labels, raw) -> GradientState:
    """``g = p - y`` and ``h = p (1 - p)`` with ``p = logistic(raw)``.

    The tree fits ``-g``: the negative gradient, i.e. ``y - p``.
    """
    labels = np.asarray(labels, dtype=np.float64)
    raw = np.asarray(raw, dtype=np.float64)
    if labels.shape != raw.shape:
        raise ValueError(f"labels {labels.shape} and predictions {raw.shape} differ in shape")
    p = logistic(raw)
    return GradientState(p - labels, p * (1.0 - p))


def log_loss(labels, raw) -> float:
    """Mean binary cross-entropy evaluated on raw scores (numerically stable)."""
    labels = np.asarray(labels, dtype=np.float64)
    raw = np.asarray(raw, dtype=np.float64)
    if len(labels) == 0:
        return 0.0
    return float(np.mean(np.logaddexp(0.0, raw) - labels * raw))
