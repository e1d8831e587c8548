"""View construction by feature set partitioning."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import DegenerateFeature, IndexOutOfRange, TooManyViews
from .numerics import kmeans

PARTITION_METHODS = ("random", "kmeans", "corr")


@dataclass(frozen=True)
class ViewPartition:
    """Disjoint, non-empty feature index groups covering ``0..d-1``.

    Indices inside a group are stored in ascending order.
    """

    groups: tuple

    def __post_init__(self):
        groups = tuple(tuple(sorted(int(i) for i in g)) for g in self.groups)
        if not groups or any(len(g) == 0 for g in groups):
            raise ValueError("partition groups must be non-empty")
        flat = [i for g in groups for i in g]
        if sorted(flat) != list(range(len(flat))):
            raise ValueError("groups must be disjoint and cover 0..d-1")
        object.__setattr__(self, "groups", groups)

    @property
    def n_views(self) -> int:
        return len(self.groups)

    @property
    def n_features(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def sizes(self) -> List[int]:
        return [len(g) for g in self.groups]

    def assignment(self) -> np.ndarray:
        """View id of every feature, as a length-d vector."""
        out = np.empty(self.n_features, dtype=int)
        for v, g in enumerate(self.groups):
            out[list(g)] = v
        return out

    @classmethod
    def from_assignment(cls, labels) -> "ViewPartition":
        labels = np.asarray(labels)
        return cls(tuple(tuple(np.flatnonzero(labels == v)) for v in np.unique(labels)))

    def to_json(self) -> str:
        return json.dumps({"groups": [list(g) for g in self.groups]})

    @classmethod
    def from_json(cls, text: str) -> "ViewPartition":
        return cls(tuple(tuple(g) for g in json.loads(text)["groups"]))


@dataclass
class MultiViewData:
    views: List[np.ndarray]
    partition: ViewPartition

    @property
    def n_samples(self) -> int:
        return self.views[0].shape[0]

    def take(self, rows) -> "MultiViewData":
        return MultiViewData([X[rows] for X in self.views], self.partition)

    def reassemble(self) -> np.ndarray:
        X = np.empty((self.n_samples, self.partition.n_features))
        for Xv, g in zip(self.views, self.partition.groups):
            X[:, list(g)] = Xv
        return X


def _check_views(d, V):
    if V < 1:
        raise ValueError("need at least one view")
    if V > d:
        raise TooManyViews(f"cannot split {d} features into {V} views")


def random_partition(d: int, V: int, seed: int) -> ViewPartition:
    _check_views(d, V)
    perm = np.random.default_rng(seed).permutation(d)
    return ViewPartition(tuple(tuple(chunk) for chunk in np.array_split(perm, V)))


def _cluster_features(points, V, seed):
    result = kmeans(points, V, seed)
    return ViewPartition(tuple(tuple(np.flatnonzero(result.assignment == v)) for v in range(V)))


def kmeans_feature_partition(X, V: int, seed: int) -> ViewPartition:
    """Group features (columns of ``X``) by Euclidean k-means."""
    X = np.asarray(X, dtype=float)
    _check_views(X.shape[1], V)
    return _cluster_features(X.T, V, seed)


def feature_correlation(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    centered = X - X.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->j", centered, centered))
    scale = np.maximum(np.abs(X).max(axis=0), 1.0)
    constant = norms <= 1e-12 * scale * np.sqrt(X.shape[0])
    if constant.any():
        raise DegenerateFeature(f"constant feature(s) {np.flatnonzero(constant)[:10].tolist()}")
    Z = centered / norms
    corr = Z.T @ Z
    np.clip(corr, -1.0, 1.0, out=corr)
    return corr


def correlation_partition(X, V: int, seed: int) -> ViewPartition:
    """Cluster features by their rows of the Pearson correlation matrix."""
    X = np.asarray(X, dtype=float)
    _check_views(X.shape[1], V)
    return _cluster_features(feature_correlation(X), V, seed)


def build_partition(method: str, X, V: int, seed: int) -> ViewPartition:
    if method == "random":
        return random_partition(np.asarray(X).shape[1], V, seed)
    if method == "kmeans":
        return kmeans_feature_partition(X, V, seed)
    if method == "corr":
        return correlation_partition(X, V, seed)
    raise ValueError(f"unknown partition method {method!r}")


def split_by_partition(X, partition: ViewPartition) -> MultiViewData:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != partition.n_features:
        raise IndexOutOfRange(f"partition covers {partition.n_features} features, data has shape {X.shape}")
    return MultiViewData([X[:, list(g)] for g in partition.groups], partition)


def split_groups(X, groups: Sequence[Sequence[int]]) -> MultiViewData:
    """Like :func:`split_by_partition` but validates raw index groups first."""
    X = np.asarray(X, dtype=float)
    d = X.shape[1]
    for g in groups:
        bad = [i for i in g if not 0 <= i < d]
        if bad:
            raise IndexOutOfRange(f"feature index {bad[0]} outside 0..{d - 1}")
    return split_by_partition(X, ViewPartition(tuple(tuple(g) for g in groups)))
