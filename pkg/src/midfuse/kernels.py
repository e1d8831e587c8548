"""RBF kernels, LS-SVM and the coupled multi-view LS-SVM.

MV-LSSVM primal (per view ``v``, per sample ``k``)::

    min  sum_v 1/2 |w_v|^2 + 1/2 sum_k e_k^T G e_k
    s.t. y_k (w_v^T phi_v(x_k) + b_v) = 1 - e_kv

where ``G`` has ``gamma_v`` on the diagonal and the coupling ``rho`` off it.
Eliminating ``w`` and ``e`` gives, for every view,

    Omega_v a_v + sum_u (G^-1)_vu a_u + b_v y = 1,    y^T a_v = 0

which is assembled into one ``V (N + 1)`` system and solved directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, IllPosedCoupling, PartitionMismatch
from .numerics import solve_linear
from .views import MultiViewData, ViewPartition


def sign(x) -> np.ndarray:
    """Elementwise sign with ``sign(0) == +1``."""
    return np.where(np.asarray(x) >= 0, 1, -1)


def sq_distances(A, B=None) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    same = B is None
    B = A if same else np.asarray(B, dtype=float)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"feature dimensions differ: {A.shape} vs {B.shape}")
    an = np.einsum("ij,ij->i", A, A)
    bn = an if same else np.einsum("ij,ij->i", B, B)
    D = an[:, None] + bn[None, :] - 2.0 * (A @ B.T)
    np.maximum(D, 0.0, out=D)
    if same:
        np.fill_diagonal(D, 0.0)
        D = 0.5 * (D + D.T)
    return D


def rbf_gram(A, B=None, gamma: Optional[float] = None) -> np.ndarray:
    """``exp(-gamma |a_i - b_j|^2)``; ``gamma`` defaults to ``1 / n_features``.

    With ``B`` omitted the Gram matrix of ``A`` with itself is returned, which
    is exactly symmetric with a unit diagonal.
    """
    D = sq_distances(A, B)
    if gamma is None:
        gamma = 1.0 / np.asarray(A).shape[1]
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return np.exp(-gamma * D)


@dataclass
class KernelModel:
    alpha: np.ndarray
    b: float
    gamma_reg: float
    support_y: np.ndarray
    support_X: Optional[np.ndarray] = None
    kernel_gamma: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha.tolist(),
            "b": self.b,
            "gamma_reg": self.gamma_reg,
            "support_y": self.support_y.tolist(),
            "kernel_gamma": self.kernel_gamma,
            "support_X": None if self.support_X is None else self.support_X.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KernelModel":
        sx = data.get("support_X")
        return cls(np.asarray(data["alpha"]), float(data["b"]), float(data["gamma_reg"]),
                   np.asarray(data["support_y"], dtype=float),
                   None if sx is None else np.asarray(sx, dtype=float), data.get("kernel_gamma"))


def lssvm_system(K, y, gamma_reg):
    """KKT matrix and right-hand side of the LS-SVM classifier, unknowns ``[b, alpha]``."""
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    if K.shape != (n, n):
        raise DimensionMismatch(f"Gram matrix {K.shape} does not match {n} labels")
    M = np.empty((n + 1, n + 1))
    M[0, 0] = 0.0
    M[0, 1:] = y
    M[1:, 0] = y
    M[1:, 1:] = np.outer(y, y) * K
    M[np.arange(1, n + 1), np.arange(1, n + 1)] += 1.0 / gamma_reg
    rhs = np.concatenate([[0.0], np.ones(n)])
    return M, rhs


def train_lssvm(K, y, gamma_reg: float, support_X=None, kernel_gamma=None) -> KernelModel:
    if gamma_reg <= 0:
        raise ValueError("gamma_reg must be positive")
    M, rhs = lssvm_system(K, y, gamma_reg)
    sol = solve_linear(M, rhs)
    y = np.asarray(y, dtype=float)
    sx = None if support_X is None else np.asarray(support_X, dtype=float)
    return KernelModel(sol[1:], float(sol[0]), float(gamma_reg), y, sx, kernel_gamma)


def lssvm_scores_from_gram(model: KernelModel, K_new) -> np.ndarray:
    """Latent scores given the cross Gram matrix (new samples x support)."""
    K_new = np.asarray(K_new, dtype=float)
    if K_new.shape[1] != model.alpha.size:
        raise DimensionMismatch(f"cross Gram has {K_new.shape[1]} columns, model has {model.alpha.size} duals")
    return K_new @ (model.alpha * model.support_y) + model.b


def lssvm_raw(model: KernelModel, X_new) -> np.ndarray:
    if model.support_X is None:
        raise ValueError("model was trained from a Gram matrix only; use lssvm_scores_from_gram")
    X_new = np.asarray(X_new, dtype=float)
    if X_new.ndim != 2 or X_new.shape[1] != model.support_X.shape[1]:
        raise DimensionMismatch(f"expected {model.support_X.shape[1]} features, got shape {X_new.shape}")
    gamma = model.kernel_gamma if model.kernel_gamma is not None else 1.0 / model.support_X.shape[1]
    return lssvm_scores_from_gram(model, rbf_gram(X_new, model.support_X, gamma))


def lssvm_predict(model: KernelModel, X_new) -> np.ndarray:
    return sign(lssvm_raw(model, X_new))


@dataclass
class MVKernelModel:
    alphas: List[np.ndarray]
    bs: List[float]
    gammas: List[float]
    rho: float
    support_y: np.ndarray
    partition: Optional[ViewPartition] = None
    support_views: Optional[List[np.ndarray]] = None
    kernel_gammas: Optional[List[float]] = None

    @property
    def n_views(self) -> int:
        return len(self.alphas)

    def to_dict(self) -> dict:
        return {
            "alphas": [a.tolist() for a in self.alphas],
            "bs": list(self.bs),
            "gammas": list(self.gammas),
            "rho": self.rho,
            "support_y": self.support_y.tolist(),
            "kernel_gammas": self.kernel_gammas,
            "partition": None if self.partition is None else json.loads(self.partition.to_json()),
            "support_views": None if self.support_views is None else [X.tolist() for X in self.support_views],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MVKernelModel":
        part = data.get("partition")
        sv = data.get("support_views")
        return cls([np.asarray(a) for a in data["alphas"]], [float(b) for b in data["bs"]],
                   [float(g) for g in data["gammas"]], float(data["rho"]),
                   np.asarray(data["support_y"], dtype=float),
                   None if part is None else ViewPartition(tuple(tuple(g) for g in part["groups"])),
                   None if sv is None else [np.asarray(X, dtype=float) for X in sv],
                   data.get("kernel_gammas"))


def coupling_matrix(gammas: Sequence[float], rho: float) -> np.ndarray:
    gammas = np.asarray(gammas, dtype=float)
    V = gammas.size
    if np.any(gammas <= 0):
        raise ValueError("view regularization constants must be positive")
    if rho < 0 or rho * (V - 1) >= gammas.min():
        raise IllPosedCoupling(f"rho={rho} violates rho*(V-1) < min(gamma)={gammas.min()}")
    G = np.full((V, V), float(rho))
    np.fill_diagonal(G, gammas)
    return G


def mv_lssvm_system(grams: Sequence[np.ndarray], y, gammas, rho):
    """Block KKT matrix; unknowns ordered ``[b_1, a_1, b_2, a_2, ...]``."""
    y = np.asarray(y, dtype=float)
    n = y.size
    V = len(grams)
    if len(gammas) != V:
        raise DimensionMismatch(f"{len(gammas)} regularization constants for {V} views")
    Ginv = np.linalg.inv(coupling_matrix(gammas, rho))
    size = n + 1
    M = np.zeros((V * size, V * size))
    yy = np.outer(y, y)
    diag = np.arange(n)
    for v, K in enumerate(grams):
        K = np.asarray(K, dtype=float)
        if K.shape != (n, n):
            raise DimensionMismatch(f"view {v} Gram matrix {K.shape} does not match {n} labels")
        r = v * size
        M[r, r + 1:r + size] = y
        M[r + 1:r + size, r] = y
        M[r + 1:r + size, r + 1:r + size] = yy * K
        for u in range(V):
            c = u * size
            M[r + 1 + diag, c + 1 + diag] += Ginv[v, u]
    rhs = np.tile(np.concatenate([[0.0], np.ones(n)]), V)
    return M, rhs


def train_mv_lssvm_grams(grams, y, gammas, rho, partition=None, support_views=None,
                         kernel_gammas=None) -> MVKernelModel:
    M, rhs = mv_lssvm_system(grams, y, gammas, rho)
    sol = solve_linear(M, rhs)
    n = np.asarray(y).size
    blocks = sol.reshape(len(grams), n + 1)
    return MVKernelModel([blk[1:].copy() for blk in blocks], [float(blk[0]) for blk in blocks],
                         [float(g) for g in gammas], float(rho), np.asarray(y, dtype=float),
                         partition, support_views, kernel_gammas)


def train_mv_lssvm(views: MultiViewData, y, gammas, rho: float, kernel_gammas=None) -> MVKernelModel:
    """Fit MV-LSSVM on multi-view data with per-view RBF kernels.

    ``kernel_gammas`` defaults to ``1 / d_v`` for each view.
    """
    if kernel_gammas is None:
        kernel_gammas = [1.0 / X.shape[1] for X in views.views]
    grams = [rbf_gram(X, None, g) for X, g in zip(views.views, kernel_gammas)]
    return train_mv_lssvm_grams(grams, y, gammas, rho, views.partition,
                                [np.asarray(X, dtype=float) for X in views.views], list(kernel_gammas))


def mv_view_scores_from_grams(model: MVKernelModel, cross_grams) -> np.ndarray:
    """Per-view latent scores, shape ``(M, V)``."""
    if len(cross_grams) != model.n_views:
        raise PartitionMismatch(f"{len(cross_grams)} views given, model has {model.n_views}")
    cols = [np.asarray(K) @ (a * model.support_y) + b for K, a, b in zip(cross_grams, model.alphas, model.bs)]
    return np.column_stack(cols)


def mv_view_scores(model: MVKernelModel, views_new: MultiViewData) -> np.ndarray:
    if model.support_views is None:
        raise ValueError("model has no stored support views")
    if model.partition is not None and views_new.partition != model.partition:
        raise PartitionMismatch("prediction data uses a different partition than training")
    if len(views_new.views) != model.n_views:
        raise PartitionMismatch(f"{len(views_new.views)} views given, model has {model.n_views}")
    cross = [rbf_gram(Xn, Xs, g) for Xn, Xs, g in zip(views_new.views, model.support_views, model.kernel_gammas)]
    return mv_view_scores_from_grams(model, cross)


def mv_lssvm_predict(model: MVKernelModel, views_new: MultiViewData) -> np.ndarray:
    return sign(mv_view_scores(model, views_new).sum(axis=1))
