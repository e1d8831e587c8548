"""Spectral clustering, pairwise co-regularized multi-view spectral
clustering and the Davies-Bouldin index."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import DegenerateGraph, SingleCluster, TooFewPoints
from .kernels import rbf_gram
from .numerics import kmeans, top_k_eigenpairs
from .views import MultiViewData

COREG_LAMBDA = 0.02
COREG_MAX_SWEEPS = 50
COREG_TOL = 1e-6


@dataclass
class ClusterResult:
    assignment: np.ndarray
    embedding: np.ndarray
    objective_trace: List[float] = field(default_factory=list)
    view_embeddings: Optional[List[np.ndarray]] = None
    n_clusters: int = 2

    @property
    def degenerate(self) -> bool:
        """True when fewer clusters than requested came out non-empty."""
        return np.unique(self.assignment).size < self.n_clusters


def affinity(X, gamma: Optional[float] = None) -> np.ndarray:
    """RBF affinity with a zero diagonal."""
    A = rbf_gram(X, None, gamma)
    np.fill_diagonal(A, 0.0)
    return A


def normalized_affinity(A) -> np.ndarray:
    """``D^-1/2 A D^-1/2``."""
    deg = A.sum(axis=1)
    if np.any(deg <= 1e-300):
        raise DegenerateGraph(f"{int(np.sum(deg <= 1e-300))} node(s) with zero degree")
    s = 1.0 / np.sqrt(deg)
    L = A * s[:, None] * s[None, :]
    return 0.5 * (L + L.T)


def _row_normalize(U):
    norms = np.linalg.norm(U, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return U / norms


def spectral_cluster(X, k: int, gamma: Optional[float] = None, seed: int = 0) -> ClusterResult:
    """Normalized spectral clustering (Ng-Jordan-Weiss style).

    ``gamma`` defaults to ``1 / n_features``.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] < k:
        raise TooFewPoints(f"{X.shape[0]} points cannot form {k} clusters")
    L = normalized_affinity(affinity(X, gamma))
    U = top_k_eigenpairs(L, k).vectors
    assignment = kmeans(_row_normalize(U), k, seed).assignment
    return ClusterResult(assignment, U, n_clusters=k)


def coreg_objective(laplacians, embeddings, lam: float) -> float:
    """``sum_v tr(U_v' L_v U_v) + lam * sum_{v<u} tr(U_v U_v' U_u U_u')``."""
    value = sum(float(np.einsum("ij,ij->", U, L @ U)) for L, U in zip(laplacians, embeddings))
    V = len(embeddings)
    for v in range(V):
        for u in range(v + 1, V):
            cross = embeddings[v].T @ embeddings[u]
            value += lam * float(np.einsum("ij,ij->", cross, cross))
    return value


def coreg_spectral(views, k: int, gammas: Optional[Sequence[float]] = None, lam: float = COREG_LAMBDA,
                   seed: int = 0, max_sweeps: int = COREG_MAX_SWEEPS, tol: float = COREG_TOL,
                   final: str = "concat") -> ClusterResult:
    """Pairwise co-regularized multi-view spectral clustering.

    Each sweep updates the views in order (Gauss-Seidel); view ``v`` gets the
    top-``k`` eigenvectors of ``L_v + lam * sum_{u != v} U_u U_u'``, which
    maximizes the objective with the other views held fixed, so the recorded
    trace never decreases. ``final="concat"`` clusters the row-normalized
    concatenation of all view embeddings, ``final="first"`` uses view 1 only.
    """
    Xs = views.views if isinstance(views, MultiViewData) else list(views)
    V = len(Xs)
    if V < 2:
        raise ValueError("co-regularization needs at least two views")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if gammas is None:
        gammas = [None] * V
    laplacians = [normalized_affinity(affinity(X, g)) for X, g in zip(Xs, gammas)]
    if laplacians[0].shape[0] < k:
        raise TooFewPoints(f"{laplacians[0].shape[0]} points cannot form {k} clusters")
    U = [top_k_eigenpairs(L, k).vectors for L in laplacians]
    projectors = [u @ u.T for u in U]
    trace = [coreg_objective(laplacians, U, lam)]
    for _ in range(max_sweeps):
        for v in range(V):
            M = laplacians[v] + lam * sum(projectors[u] for u in range(V) if u != v)
            U[v] = top_k_eigenpairs(M, k).vectors
            projectors[v] = U[v] @ U[v].T
        trace.append(coreg_objective(laplacians, U, lam))
        if trace[-1] - trace[-2] < tol:
            break
    if final == "concat":
        embedding = np.hstack(U)
    elif final == "first":
        embedding = U[0]
    else:
        raise ValueError(f"unknown final embedding {final!r}")
    assignment = kmeans(_row_normalize(embedding), k, seed).assignment
    return ClusterResult(assignment, embedding, trace, U, n_clusters=k)


def davies_bouldin(X, assignment) -> float:
    """Davies-Bouldin index (lower is better)."""
    X = np.asarray(X, dtype=float)
    assignment = np.asarray(assignment)
    labels = np.unique(assignment)
    if labels.size < 2:
        raise SingleCluster("Davies-Bouldin needs at least two non-empty clusters")
    centroids = np.array([X[assignment == c].mean(axis=0) for c in labels])
    spread = np.array([np.linalg.norm(X[assignment == c] - centroids[i], axis=1).mean()
                       for i, c in enumerate(labels)])
    dist = np.linalg.norm(centroids[:, None, :] - centroids[None, :, :], axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (spread[:, None] + spread[None, :]) / dist
    np.fill_diagonal(ratio, -np.inf)
    ratio[np.isnan(ratio)] = 0.0
    return float(np.mean(ratio.max(axis=1)))
