"""Late-fusion decision rules and binary cluster alignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, LengthMismatch
from .numerics import solve_linear


@dataclass(frozen=True)
class FusionWeights:
    beta: tuple

    def __post_init__(self):
        beta = tuple(float(b) for b in self.beta)
        if not beta:
            raise ValueError("empty weight vector")
        if abs(sum(beta) - 1.0) > 1e-10:
            raise ValueError(f"weights sum to {sum(beta)}, not 1")
        object.__setattr__(self, "beta", beta)

    @classmethod
    def average(cls, V: int) -> "FusionWeights":
        return cls((1.0 / V,) * V)

    def __len__(self):
        return len(self.beta)


def error_covariance(raw_preds, y) -> np.ndarray:
    """Training error covariance ``C_vu = mean_k (f_v - y)(f_u - y)``.

    ``raw_preds`` has one column per view; ``y`` may be +/-1 targets for
    kernel scores or 0/1 targets for probabilities.
    """
    P = np.asarray(raw_preds, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    y = np.asarray(y, dtype=float)
    if P.shape[0] != y.size or y.size == 0:
        raise DimensionMismatch(f"{P.shape[0]} predictions for {y.size} targets")
    E = P - y[:, None]
    return E.T @ E / y.size


def performance_weights(C) -> FusionWeights:
    """Weights minimizing ensemble training error: ``C^-1 1 / (1^T C^-1 1)``.

    Raises SingularMatrix for a singular ``C``; callers fall back to
    :meth:`FusionWeights.average`. Negative weights are allowed.
    """
    C = np.asarray(C, dtype=float)
    row_sums = solve_linear(C, np.ones(C.shape[0]))
    beta = row_sums / row_sums.sum()
    # exact normalization against round-off in the division
    beta[-1] = 1.0 - beta[:-1].sum()
    return FusionWeights(tuple(beta))


def weighted_scores(scores, weights: FusionWeights) -> np.ndarray:
    S = np.asarray(scores, dtype=float)
    if S.ndim == 1:
        S = S[None, :]
    if S.shape[1] != len(weights):
        raise DimensionMismatch(f"{S.shape[1]} score columns for {len(weights)} weights")
    return S @ np.asarray(weights.beta)


def fuse_scores(scores, weights: FusionWeights, kind: str = "sign") -> np.ndarray:
    """Fuse per-view outputs then threshold.

    ``kind="sign"`` treats columns as latent kernel scores and returns +/-1
    (0 maps to +1); ``kind="prob"`` treats them as probabilities and returns
    0/1 with ``fused >= 0.5`` mapping to 1.
    """
    fused = weighted_scores(scores, weights)
    if kind == "sign":
        return np.where(fused >= 0, 1, -1)
    if kind == "prob":
        return (fused >= 0.5).astype(int)
    raise ValueError(f"unknown fusion kind {kind!r}")


def align_binary_assignments(reference, other) -> np.ndarray:
    """Return ``other`` or its complement, whichever is closer to ``reference``.

    Ties keep ``other`` as is.
    """
    reference = np.asarray(reference, dtype=int)
    other = np.asarray(other, dtype=int)
    if reference.shape != other.shape:
        raise LengthMismatch(f"{reference.shape} vs {other.shape}")
    flipped = 1 - other
    if np.abs(flipped - reference).sum() < np.abs(other - reference).sum():
        return flipped
    return other.copy()


def majority_vote(assignments) -> np.ndarray:
    """Per-row mode of 0/1 votes; ties go to 0."""
    A = np.asarray(assignments, dtype=int)
    if A.ndim == 1:
        A = A[:, None]
    ones = A.sum(axis=1)
    return (2 * ones > A.shape[1]).astype(int)


def align_and_vote(assignments) -> np.ndarray:
    """Align every column to the first, then take the majority vote."""
    A = np.asarray(assignments, dtype=int)
    aligned = np.column_stack([align_binary_assignments(A[:, 0], A[:, v]) for v in range(A.shape[1])])
    return majority_vote(aligned)
