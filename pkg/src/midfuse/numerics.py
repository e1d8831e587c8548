"""Dense linear algebra and k-means primitives.

Matrices are plain float64 ``numpy.ndarray`` objects. The factorizations are
thin wrappers around LAPACK (through numpy/scipy) that add the error
contracts the rest of the package relies on; k-means is implemented here.
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotPositiveDefinite, SingularMatrix, TooFewPoints

SYMMETRY_TOL = 1e-10
SINGULAR_PIVOT_RTOL = 1e-12
KMEANS_RESTARTS = 10
KMEANS_MAX_ITER = 300


class EigenPairs(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


class KMeansResult(NamedTuple):
    assignment: np.ndarray
    centroids: np.ndarray
    inertia: float
    # WCSS after every Lloyd update of the winning restart
    inertia_trace: tuple


def _as_square(S, name="matrix"):
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {S.shape}")
    return S


def _check_symmetric(S):
    scale = max(1.0, float(np.abs(S).max(initial=0.0)))
    if not np.allclose(S, S.T, rtol=0.0, atol=SYMMETRY_TOL * scale):
        raise ValueError("matrix is not symmetric")


def cholesky(S) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == S``.

    Raises
    ------
    NotPositiveDefinite
        If a non-positive pivot shows up during factorization.
    """
    S = _as_square(S)
    _check_symmetric(S)
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None


def solve_linear(A, B) -> np.ndarray:
    """Solve ``A X = B`` by partial-pivoting LU.

    ``B`` may be a vector or a matrix; the result has the same shape.
    A pivot smaller than ``1e-12 * max|A|`` is treated as singular.
    """
    A = _as_square(A)
    B = np.asarray(B, dtype=float)
    if B.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"B has {B.shape[0]} rows, A has {A.shape[0]}")
    scale = float(np.abs(A).max(initial=0.0))
    if scale == 0.0 or not np.all(np.isfinite(A)):
        raise SingularMatrix("matrix is zero or non-finite")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    if np.abs(np.diag(lu)).min() < SINGULAR_PIVOT_RTOL * scale:
        raise SingularMatrix("matrix is numerically singular")
    return scipy.linalg.lu_solve((lu, piv), B, check_finite=False)


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive."""
    vectors = np.array(vectors, dtype=float, copy=True)
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def top_k_eigenpairs(S, k: int) -> EigenPairs:
    """The ``k`` algebraically largest eigenpairs of a symmetric matrix.

    Values come back in descending order. Eigenvector signs are fixed with
    :func:`fix_signs` so repeated calls give identical output.
    """
    S = _as_square(S)
    _check_symmetric(S)
    n = S.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    # symmetrize to remove round-off asymmetry before handing to LAPACK
    values, vectors = np.linalg.eigh(0.5 * (S + S.T))
    values = values[::-1][:k].copy()
    vectors = vectors[:, ::-1][:, :k]
    return EigenPairs(values, fix_signs(vectors))


def _sq_dists(points, centroids, point_norms):
    d = point_norms[:, None] - 2.0 * points @ centroids.T + np.einsum("ij,ij->i", centroids, centroids)[None, :]
    np.maximum(d, 0.0, out=d)
    return d


def _kmeans_pp(points, k, rng, point_norms):
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _sq_dists(points, points[chosen], point_norms)[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            # all remaining points coincide with a chosen center
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(free))
        chosen.append(nxt)
        closest = np.minimum(closest, _sq_dists(points, points[[nxt]], point_norms)[:, 0])
    return points[chosen].copy()


def _wcss(points, assignment, centroids):
    diff = points - centroids[assignment]
    return float(np.einsum("ij,ij->", diff, diff))


def _lloyd(points, centroids, point_norms, max_iter):
    n, k = points.shape[0], centroids.shape[0]
    assignment = None
    trace = []
    for _ in range(max_iter):
        dists = _sq_dists(points, centroids, point_norms)
        # argmin returns the lowest index on ties
        new_assignment = np.argmin(dists, axis=1)
        if assignment is not None and np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        counts = np.bincount(assignment, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            own = dists[np.arange(n), assignment]
            # only steal from clusters that keep at least one member
            own = np.where(counts[assignment] > 1, own, -1.0)
            far = int(np.argmax(own))
            counts[assignment[far]] -= 1
            assignment[far] = empty
            counts[empty] = 1
            dists[far, :] = 0.0
        sums = np.zeros_like(centroids)
        np.add.at(sums, assignment, points)
        centroids = sums / counts[:, None]
        trace.append(_wcss(points, assignment, centroids))
    return assignment, centroids, trace


def kmeans(points, k: int, seed: int, restarts: int = KMEANS_RESTARTS,
           max_iter: int = KMEANS_MAX_ITER) -> KMeansResult:
    """Lloyd's k-means with k-means++ seeding.

    Each restart ``r`` is seeded with ``seed + r``; the restart with the
    smallest within-cluster sum of squares wins (earliest on ties).
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if k < 1:
        raise ValueError("k must be positive")
    if n < k:
        raise TooFewPoints(f"{n} points cannot form {k} clusters")
    norms = np.einsum("ij,ij->i", points, points)
    best = None
    for r in range(restarts):
        rng = np.random.default_rng(seed + r)
        init = _kmeans_pp(points, k, rng, norms)
        assignment, centroids, trace = _lloyd(points, init, norms, max_iter)
        inertia = _wcss(points, assignment, centroids)
        if best is None or inertia < best.inertia:
            best = KMeansResult(assignment, centroids, inertia, tuple(trace))
    return best
