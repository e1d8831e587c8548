"""Synthetic Gaussian benchmark families.

Examples 1 and 2 are binary classification problems with a held-out test
set; Examples 3 and 4 are their clustering counterparts with a larger class
separation and no test split. Examples 2 and 4 have five inherent feature
groups with block-equicorrelated covariances.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidDimension, NoInherentViews
from .numerics import cholesky
from .views import ViewPartition

N1 = 120
N2 = 90
N_TEST_PER_CLASS = 1500
D_SWEEP = (80, 150, 240, 650, 900, 1500, 2400)
INHERENT_VIEWS = 5
TAU = (0.3, 0.7)
MAHALANOBIS = 2.7

CLASSIFICATION_EXAMPLES = (1, 2)
CLUSTERING_EXAMPLES = (3, 4)


@dataclass(frozen=True)
class ExampleSpec:
    example_id: int
    d: int
    n1: int = N1
    n2: int = N2
    n_test_per_class: Optional[int] = None

    def __post_init__(self):
        if self.example_id not in (1, 2, 3, 4):
            raise ValueError(f"unknown example {self.example_id}")
        if self.d < 1:
            raise InvalidDimension("d must be positive")
        if self.example_id in (2, 4) and self.d % INHERENT_VIEWS:
            raise InvalidDimension(f"example {self.example_id} needs d divisible by {INHERENT_VIEWS}, got {self.d}")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("class counts must be positive")
        if self.n_test_per_class is None:
            default = 0 if self.clustering else N_TEST_PER_CLASS
            object.__setattr__(self, "n_test_per_class", default)
        if self.clustering and self.n_test_per_class:
            raise ValueError("clustering examples have no test split")

    @property
    def clustering(self) -> bool:
        return self.example_id in CLUSTERING_EXAMPLES


@dataclass
class Dataset:
    """Samples of one example. Class 1 rows come first, then class 2.

    Classification labels are +1 (class 1) and -1 (class 2). For clustering
    examples ``y_train`` is None and ``truth`` holds the 0/1 cluster ids,
    kept for evaluation only.
    """

    X_train: np.ndarray
    y_train: Optional[np.ndarray]
    X_test: Optional[np.ndarray]
    y_test: Optional[np.ndarray]
    spec: ExampleSpec
    seed: int
    truth: Optional[np.ndarray] = None


def block_covariance(d: int, tau: float, num_blocks: int) -> np.ndarray:
    if num_blocks < 1 or d % num_blocks:
        raise InvalidDimension(f"d={d} is not divisible into {num_blocks} blocks")
    if not 0.0 <= tau < 1.0:
        raise ValueError("tau must lie in [0, 1)")
    size = d // num_blocks
    block = np.full((size, size), tau)
    np.fill_diagonal(block, 1.0)
    cov = np.zeros((d, d))
    for start in range(0, d, size):
        cov[start:start + size, start:start + size] = block
    return cov


def mean_shift(example_id: int, d: int) -> float:
    """Per-coordinate mean magnitude; class means are +/- this times ones."""
    if example_id == 1:
        return MAHALANOBIS / 2.0 / np.sqrt(d)
    if example_id == 3:
        return MAHALANOBIS / np.sqrt(d)
    if example_id == 2:
        return 0.0
    if example_id == 4:
        return 0.5
    raise ValueError(f"unknown example {example_id}")


def _draw(rng, n, mean, chol):
    z = rng.standard_normal((n, mean.size))
    if chol is None:
        return z + mean
    return z @ chol.T + mean


def sample_dataset(spec: ExampleSpec, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    d = spec.d
    a = mean_shift(spec.example_id, d)
    if spec.example_id in (1, 3):
        means = (np.full(d, a), np.full(d, -a))
        factors = (None, None)
    else:
        # class 1 gets the negative mean for example 4, class 2 the positive one
        means = (np.full(d, -a), np.full(d, a))
        factors = tuple(cholesky(block_covariance(d, tau, INHERENT_VIEWS)) for tau in TAU)

    X1 = _draw(rng, spec.n1, means[0], factors[0])
    X2 = _draw(rng, spec.n2, means[1], factors[1])
    X_train = np.vstack([X1, X2])
    labels = np.concatenate([np.ones(spec.n1), -np.ones(spec.n2)])
    if spec.clustering:
        truth = (labels < 0).astype(int)
        return Dataset(X_train, None, None, None, spec, seed, truth=truth)

    m = spec.n_test_per_class
    X_test = np.vstack([_draw(rng, m, means[0], factors[0]), _draw(rng, m, means[1], factors[1])])
    y_test = np.concatenate([np.ones(m), -np.ones(m)])
    return Dataset(X_train, labels, X_test, y_test, spec, seed)


def inherent_partition(spec: ExampleSpec) -> ViewPartition:
    if spec.example_id not in (2, 4):
        raise NoInherentViews(f"example {spec.example_id} has no inherent views")
    size = spec.d // INHERENT_VIEWS
    return ViewPartition(tuple(tuple(range(s, s + size)) for s in range(0, spec.d, size)))


def write_csv(dataset: Dataset, path, split: str = "train") -> None:
    """One row per sample, features ``x0..x{d-1}`` then ``label``.

    The first line is a ``#`` comment with generator provenance.
    """
    if split == "train":
        X = dataset.X_train
        labels = dataset.y_train if dataset.y_train is not None else dataset.truth
    elif split == "test":
        if dataset.X_test is None:
            raise ValueError("dataset has no test split")
        X, labels = dataset.X_test, dataset.y_test
    else:
        raise ValueError(f"unknown split {split!r}")
    spec = dataset.spec
    with open(path, "w", newline="") as fh:
        fh.write(f"# midfuse example={spec.example_id} d={spec.d} n1={spec.n1} n2={spec.n2} "
                 f"n_test_per_class={spec.n_test_per_class} seed={dataset.seed} split={split}\n")
        writer = csv.writer(fh)
        writer.writerow([f"x{j}" for j in range(X.shape[1])] + ["label"])
        for row, label in zip(X, labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def read_csv(path):
    """Inverse of :func:`write_csv`; returns ``(X, labels, provenance)``."""
    provenance = {}
    with open(path, newline="") as fh:
        first = fh.readline()
        if first.startswith("#"):
            for token in first[1:].split():
                if "=" in token:
                    key, value = token.split("=", 1)
                    provenance[key] = value
        else:
            fh.seek(0)
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    if header[-1] == "label":
        return data[:, :-1], data[:, -1].astype(int), provenance
    return data, None, provenance
