"""Evaluation metrics: accuracy, adjusted Rand index and run summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch


def accuracy(predicted, truth) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise LengthMismatch(f"{predicted.shape} vs {truth.shape}")
    if predicted.size == 0:
        raise ValueError("accuracy of an empty prediction")
    return float(np.mean(predicted == truth))


def _comb2(x):
    x = np.asarray(x, dtype=float)
    return x * (x - 1.0) / 2.0


def contingency(a, b) -> np.ndarray:
    _, ai = np.unique(np.asarray(a), return_inverse=True)
    _, bi = np.unique(np.asarray(b), return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai.ravel(), bi.ravel()), 1)
    return table


def ari(a, b) -> float:
    """Adjusted Rand index between two labelings.

    When the expected and maximum indices coincide (both labelings trivial),
    returns 1.0 if the two describe the same set partition and 0.0 otherwise.
    """
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise LengthMismatch(f"{a.shape} vs {b.shape}")
    n = a.size
    if n < 2:
        raise ValueError("ARI needs at least two samples")
    table = contingency(a, b)
    index = _comb2(table).sum()
    sum_a = _comb2(table.sum(axis=1)).sum()
    sum_b = _comb2(table.sum(axis=0)).sum()
    total = _comb2(n)
    # scaled by C(n, 2) so integer counts stay exact
    expected = sum_a * sum_b
    maximum = 0.5 * (sum_a + sum_b) * total
    if maximum == expected:
        same = (np.count_nonzero(table, axis=0) == 1).all() and (np.count_nonzero(table, axis=1) == 1).all()
        return 1.0 if same else 0.0
    return float((index * total - expected) / (maximum - expected))


@dataclass(frozen=True)
class RunSummary:
    values: tuple
    mean: float
    std: float
    median: float

    @classmethod
    def from_values(cls, values) -> "RunSummary":
        """Summarize finite values; NaN entries (missing runs) are dropped."""
        arr = np.asarray(list(values), dtype=float)
        arr = arr[~np.isnan(arr)]
        if arr.size == 0:
            return cls((), float("nan"), float("nan"), float("nan"))
        std = float(np.std(arr, ddof=1)) if arr.size > 1 else float("nan")
        return cls(tuple(float(v) for v in arr), float(np.mean(arr)), std, float(np.median(arr)))
