"""Random-search hyperparameter tuning with stratified k-fold CV."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from .errors import ClassTooSmall

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 30
DEFAULT_FOLDS = 10
MAX_REJECTIONS = 10_000


@dataclass(frozen=True)
class Categorical:
    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ValueError("categorical dimension needs at least one value")
        object.__setattr__(self, "values", tuple(self.values))

    def draw(self, rng):
        return self.values[int(rng.integers(len(self.values)))]


@dataclass(frozen=True)
class LogUniform:
    low: float
    high: float

    def __post_init__(self):
        if not 0 < self.low < self.high:
            raise ValueError("log-uniform interval needs 0 < low < high")

    def draw(self, rng):
        return float(math.exp(rng.uniform(math.log(self.low), math.log(self.high))))


Dimension = Union[Categorical, LogUniform]


@dataclass
class SearchSpace:
    """Named dimensions plus an optional validity predicate.

    Draws that fail ``constraint`` are discarded and redrawn in full.
    """

    dims: Dict[str, Dimension]
    constraint: Optional[Callable[[dict], bool]] = None

    def __post_init__(self):
        if not self.dims:
            raise ValueError("search space has no dimensions")

    def draw(self, rng) -> dict:
        for _ in range(MAX_REJECTIONS):
            config = {name: dim.draw(rng) for name, dim in self.dims.items()}
            if self.constraint is None or self.constraint(config):
                return config
        raise RuntimeError("could not draw a configuration satisfying the constraint")


@dataclass
class TrialRecord:
    config: dict
    fold_scores: List[float]
    mean_score: float
    index: int = 0
    error: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps({"index": self.index, "config": self.config, "fold_scores": self.fold_scores,
                           "mean_score": self.mean_score if math.isfinite(self.mean_score) else None,
                           "error": self.error}, sort_keys=True)


def stratified_folds(y, k: int, seed: int) -> List[np.ndarray]:
    """Split indices into ``k`` folds with per-class counts balanced to +/-1."""
    y = np.asarray(y)
    if k < 1:
        raise ValueError("k must be positive")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    offset = 0
    for label in np.unique(y):
        members = np.flatnonzero(y == label)
        if members.size < k:
            raise ClassTooSmall(f"class {label!r} has {members.size} members, fewer than {k} folds")
        members = rng.permutation(members)
        for j, idx in enumerate(members):
            folds[(offset + j) % k].append(int(idx))
        # continue dealing where this class stopped so fold sizes stay even
        offset = (offset + members.size) % k
    return [np.array(sorted(f), dtype=int) for f in folds]


def draw_configs(space: SearchSpace, budget: int, seed: int) -> List[dict]:
    rng = np.random.default_rng(seed)
    return [space.draw(rng) for _ in range(budget)]


def random_search(space: SearchSpace, budget: int, evaluate: Callable[[dict], Sequence[float]],
                  seed: int, log_path=None, trials_out: Optional[list] = None) -> TrialRecord:
    """Evaluate ``budget`` random configurations and return the best trial.

    ``evaluate`` returns per-fold scores (a single float is accepted too).
    A failing evaluation scores ``-inf``. Ties go to the earliest draw.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    configs = draw_configs(space, budget, seed)
    best = None
    records = []
    for i, config in enumerate(configs):
        try:
            scores = evaluate(config)
            scores = [float(s) for s in (scores if np.ndim(scores) else [scores])]
            record = TrialRecord(config, scores, float(np.mean(scores)), i)
        except Exception as exc:  # noqa: BLE001 - any evaluator failure voids the trial
            log.warning("trial %d failed: %s", i, exc)
            record = TrialRecord(config, [], -math.inf, i, error=f"{type(exc).__name__}: {exc}")
        records.append(record)
        if best is None or record.mean_score > best.mean_score:
            best = record
    if log_path is not None:
        with open(log_path, "a") as fh:
            for r in records:
                fh.write(r.to_json() + "\n")
    if trials_out is not None:
        trials_out.extend(records)
    return best


def cross_validate(fit_score: Callable[[np.ndarray, np.ndarray], float], folds: Sequence[np.ndarray]) -> List[float]:
    """Call ``fit_score(train_idx, val_idx)`` for every fold.

    A single fold validates on itself (there is nothing to hold out).
    """
    if len(folds) == 1:
        return [fit_score(folds[0], folds[0])]
    out = []
    for i, val in enumerate(folds):
        train = np.concatenate([f for j, f in enumerate(folds) if j != i])
        out.append(float(fit_score(np.sort(train), val)))
    return out
