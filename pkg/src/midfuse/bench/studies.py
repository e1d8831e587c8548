"""Experiment runners for the view-recovery, classification and clustering studies.

Every (d, run) pair is one unit of work: the dataset is sampled once and all
methods of the grid are tuned, trained and scored on that same sample.
"""

from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from .. import nn
from ..clustering import coreg_spectral, davies_bouldin, spectral_cluster
from ..errors import SingleCluster, SingularMatrix
from ..fusion import FusionWeights, align_and_vote, error_covariance, fuse_scores, performance_weights
from ..kernels import (lssvm_scores_from_gram, mv_view_scores_from_grams, rbf_gram, sign, train_lssvm,
                       train_mv_lssvm_grams)
from ..metrics import accuracy, ari
from ..synth import ExampleSpec, inherent_partition, sample_dataset
from ..tuning import Categorical, LogUniform, SearchSpace, cross_validate, random_search, stratified_folds
from ..views import build_partition, split_by_partition
from .config import ExperimentConfig, RunRecord

log = logging.getLogger(__name__)

GAMMA_REG_RANGE = (1e-3, 1e3)
RHO_RANGE = (1e-3, 1e1)
MAX_VIEWS = 5


@dataclass(frozen=True)
class RunSeeds:
    """Seeds for one run; every method in the run shares them."""

    data: int
    partition: int
    tune: int
    folds: int
    model: int

    @classmethod
    def derive(cls, seed_base: int, run: int) -> "RunSeeds":
        base = seed_base + run
        return cls(base, base + 1_000_003, base + 2_000_003, base + 3_000_017, base + 4_000_037)


# ----------------------------------------------------------------------------
# view recovery


def view_recovery_unit(config: ExperimentConfig, d: int, run: int):
    seeds = RunSeeds.derive(config.seed_base, run)
    spec = ExampleSpec(config.example_id, d)
    ds = sample_dataset(spec, seeds.data)
    truth = inherent_partition(spec).assignment()
    records = []
    for method in config.resolved_methods():
        t0 = time.perf_counter()
        part = build_partition(method, ds.X_train, truth.max() + 1, seeds.partition)
        value = ari(part.assignment(), truth)
        records.append(_record(config, method, d, run, seeds.data, "ari", value, t0))
    return records, []


# ----------------------------------------------------------------------------
# shared helpers


def _record(config, method, d, run, seed, metric, value, t0):
    wall = (time.perf_counter() - t0) * 1e3 if config.record_time else None
    return RunRecord(config.study, method, config.example_id, d, run, seed, metric, float(value), wall)


def _split_label(label):
    fusion, _, part = label.partition("-")
    return fusion, part


def _partitions(config, spec, X, part_method, seed):
    """Candidate partitions keyed by view count."""
    if part_method == "inherent":
        p = inherent_partition(spec)
        return {p.n_views: p}
    return {V: build_partition(part_method, X, V, seed) for V in config.views if V <= X.shape[1]}


def _kernel_gamma(config, d_full, d_view):
    return 1.0 / (d_view if config.kernel_gamma == "view" else d_full)


def _fuse(decision, train_outputs, y_train_target, val_outputs, kind):
    V = train_outputs.shape[1]
    weights = FusionWeights.average(V)
    if decision == "performance":
        try:
            weights = performance_weights(error_covariance(train_outputs, y_train_target))
        except SingularMatrix:
            log.info("singular training error covariance; falling back to average fusion")
    return fuse_scores(val_outputs, weights, kind)


def _gamma_dims():
    return {f"gamma_reg_{v + 1}": LogUniform(*GAMMA_REG_RANGE) for v in range(MAX_VIEWS)}


def _view_gammas(cfg):
    return [cfg[f"gamma_reg_{v + 1}"] for v in range(cfg["V"])]


def _coupling_ok(cfg):
    return cfg["rho"] * (cfg["V"] - 1) < min(_view_gammas(cfg))


# ----------------------------------------------------------------------------
# kernel classification


class _KernelCell:
    """Precomputed Gram matrices for one partition (or the full feature set)."""

    def __init__(self, config, X_train, X_test, partition=None):
        d = X_train.shape[1]
        if partition is None:
            blocks = [(X_train, X_test)]
        else:
            blocks = list(zip(split_by_partition(X_train, partition).views,
                              split_by_partition(X_test, partition).views))
        self.grams, self.cross = [], []
        for Xtr, Xte in blocks:
            g = _kernel_gamma(config, d, Xtr.shape[1])
            self.grams.append(rbf_gram(Xtr, None, g))
            self.cross.append(rbf_gram(Xte, Xtr, g))


def _lssvm_scores(K, y, gamma_reg, tr, ev):
    model = train_lssvm(K[np.ix_(tr, tr)], y[tr], gamma_reg)
    return lssvm_scores_from_gram(model, K[np.ix_(ev, tr)])


def _kernel_fit_predict(method, cfg, cell, y, tr, ev, cross=None):
    """Labels for ``ev`` from models trained on ``tr``.

    With ``cross`` given, ``ev`` indexes the rows of those cross Grams (the
    test set) instead of the training Gram.
    """
    fusion, _ = _split_label(method)
    grams = cell.grams

    def block(v, rows):
        if cross is None:
            return grams[v][np.ix_(rows, tr)]
        return cross[v][np.ix_(rows, tr)]

    if fusion == "EF":
        model = train_lssvm(grams[0][np.ix_(tr, tr)], y[tr], cfg["gamma_reg"])
        return sign(lssvm_scores_from_gram(model, block(0, ev)))
    if fusion == "MF":
        sub = [K[np.ix_(tr, tr)] for K in grams]
        model = train_mv_lssvm_grams(sub, y[tr], _view_gammas(cfg), cfg["rho"])
        scores = mv_view_scores_from_grams(model, [block(v, ev) for v in range(len(grams))])
        return sign(scores.sum(axis=1))
    models = [train_lssvm(K[np.ix_(tr, tr)], y[tr], g) for K, g in zip(grams, _view_gammas(cfg))]
    train_out = np.column_stack([lssvm_scores_from_gram(m, K[np.ix_(tr, tr)]) for m, K in zip(models, grams)])
    val_out = np.column_stack([lssvm_scores_from_gram(m, block(v, ev)) for v, m in enumerate(models)])
    return _fuse(cfg["decision"], train_out, y[tr], val_out, "sign")


def _kernel_space(fusion, views):
    if fusion == "EF":
        return SearchSpace({"gamma_reg": LogUniform(*GAMMA_REG_RANGE)})
    dims = {"V": Categorical(tuple(sorted(views)))}
    dims.update(_gamma_dims())
    if fusion == "MF":
        dims["rho"] = LogUniform(*RHO_RANGE)
        return SearchSpace(dims, _coupling_ok)
    dims["decision"] = Categorical(("average", "performance"))
    return SearchSpace(dims)


# ----------------------------------------------------------------------------
# NN classification


def _nn_config(fusion, cfg, dims):
    arch = "mid" if fusion == "MF" else "early"
    return nn.MLPConfig(arch, dims, cfg["layers"], cfg["width"], cfg["dropout"], cfg["epochs"], cfg["batch_size"])


def _nn_fit_predict(method, cfg, blocks, y01, tr, ev_blocks, seed):
    """0/1 predictions on ``ev_blocks`` from networks trained on rows ``tr``."""
    fusion, _ = _split_label(method)
    train_blocks = [X[tr] for X in blocks]
    if fusion == "EF":
        model = nn.train(_nn_config("EF", cfg, (blocks[0].shape[1],)), train_blocks[0], y01[tr], seed)
        return nn.predict(model, ev_blocks[0])
    if fusion == "MF":
        model = nn.train(_nn_config("MF", cfg, tuple(X.shape[1] for X in blocks)), train_blocks, y01[tr], seed)
        return nn.predict(model, ev_blocks)
    models = [nn.train(_nn_config("LF", cfg, (X.shape[1],)), X, y01[tr], seed + v)
              for v, X in enumerate(train_blocks)]
    train_out = np.column_stack([nn.predict_proba(m, X) for m, X in zip(models, train_blocks)])
    val_out = np.column_stack([nn.predict_proba(m, X) for m, X in zip(models, ev_blocks)])
    return _fuse(cfg["decision"], train_out, y01[tr], val_out, "prob")


def _nn_space(fusion, views):
    dims = {
        "epochs": Categorical(nn.EPOCHS),
        "batch_size": Categorical(nn.BATCH_SIZES),
        "dropout": Categorical(nn.DROPOUT_RATES),
        "layers": Categorical(nn.LAYERS),
        "width": Categorical(nn.WIDTHS),
    }
    if fusion != "EF":
        dims["V"] = Categorical(tuple(sorted(views)))
    if fusion == "LF":
        dims["decision"] = Categorical(("average", "performance"))
    return SearchSpace(dims)


# ----------------------------------------------------------------------------


def classification_unit(config: ExperimentConfig, d: int, run: int):
    seeds = RunSeeds.derive(config.seed_base, run)
    spec = ExampleSpec(config.example_id, d)
    ds = sample_dataset(spec, seeds.data)
    y = ds.y_train
    folds = stratified_folds(y, config.folds, seeds.folds)
    kernel = config.study == "kernel_cls"
    partition_cache: Dict[str, dict] = {}
    records, trials = [], []

    for method in config.resolved_methods():
        t0 = time.perf_counter()
        fusion, part_method = _split_label(method)
        try:
            if fusion == "EF":
                parts = {None: None}
            else:
                if part_method not in partition_cache:
                    partition_cache[part_method] = _partitions(config, spec, ds.X_train, part_method, seeds.partition)
                parts = partition_cache[part_method]
            space = (_kernel_space if kernel else _nn_space)(fusion, parts.keys() if fusion != "EF" else ())
            if kernel:
                cells = {V: _KernelCell(config, ds.X_train, ds.X_test, p) for V, p in parts.items()}

                def evaluate(cfg):
                    cell = cells[cfg.get("V")]
                    return cross_validate(lambda tr, va: accuracy(_kernel_fit_predict(method, cfg, cell, y, tr, va),
                                                                  y[va]), folds)
            else:
                y01 = (y > 0).astype(float)
                blocks = {V: ([ds.X_train] if p is None else split_by_partition(ds.X_train, p).views,
                              [ds.X_test] if p is None else split_by_partition(ds.X_test, p).views)
                          for V, p in parts.items()}

                def evaluate(cfg):
                    train_blocks = blocks[cfg.get("V")][0]
                    return cross_validate(
                        lambda tr, va: accuracy(_nn_fit_predict(method, cfg, train_blocks, y01, tr,
                                                                [X[va] for X in train_blocks], seeds.model),
                                                y01[va]), folds)

            cell_trials = []
            best = random_search(space, config.budget, evaluate, seeds.tune, trials_out=cell_trials)
            if not math.isfinite(best.mean_score):
                raise RuntimeError("every tuning trial failed")
            cfg = best.config
            all_rows = np.arange(y.size)
            if kernel:
                cell = cells[cfg.get("V")]
                test_rows = np.arange(ds.X_test.shape[0])
                pred = _kernel_fit_predict(method, cfg, cell, y, all_rows, test_rows, cross=cell.cross)
                value = accuracy(pred, ds.y_test)
            else:
                train_blocks, test_blocks = blocks[cfg.get("V")]
                pred = _nn_fit_predict(method, cfg, train_blocks, y01, all_rows, test_blocks, seeds.model)
                value = accuracy(pred, (ds.y_test > 0).astype(int))
            trials.extend({"method": method, "d": d, "run": run, "trial": json.loads(t.to_json())}
                          for t in cell_trials)
            log.info("%s d=%d run=%d best=%s acc=%.4f", method, d, run, cfg, value)
        except Exception as exc:  # noqa: BLE001 - a failed cell is recorded as missing
            log.error("%s d=%d run=%d failed: %s", method, d, run, exc)
            value = float("nan")
        records.append(_record(config, method, d, run, seeds.data, "accuracy", value, t0))
    return records, trials


# ----------------------------------------------------------------------------
# clustering


def _db_or_inf(X, assignment):
    try:
        return davies_bouldin(X, assignment)
    except SingleCluster:
        return math.inf


def clustering_unit(config: ExperimentConfig, d: int, run: int):
    seeds = RunSeeds.derive(config.seed_base, run)
    spec = ExampleSpec(config.example_id, d)
    ds = sample_dataset(spec, seeds.data)
    X, truth = ds.X_train, ds.truth
    partition_cache: Dict[str, dict] = {}
    records, trials = [], []

    for method in config.resolved_methods():
        t0 = time.perf_counter()
        fusion, part_method = _split_label(method)
        degenerate = False
        try:
            if fusion == "EF":
                assignment = spectral_cluster(X, 2, _kernel_gamma(config, d, d), seeds.model).assignment
            else:
                if part_method not in partition_cache:
                    partition_cache[part_method] = _partitions(config, spec, X, part_method, seeds.partition)
                best_db, assignment = math.inf, None
                for V, part in sorted(partition_cache[part_method].items()):
                    mv = split_by_partition(X, part)
                    gammas = [_kernel_gamma(config, d, Xv.shape[1]) for Xv in mv.views]
                    if fusion == "MF":
                        cand = coreg_spectral(mv, 2, gammas, config.coreg_lambda, seeds.model,
                                              final=config.coreg_final).assignment
                    else:
                        votes = np.column_stack([spectral_cluster(Xv, 2, g, seeds.model).assignment
                                                 for Xv, g in zip(mv.views, gammas)])
                        cand = align_and_vote(votes)
                    db = _db_or_inf(X, cand)
                    trials.append({"method": method, "d": d, "run": run,
                                   "trial": {"V": V, "davies_bouldin": db if math.isfinite(db) else None}})
                    # strict comparison keeps the smaller V on ties
                    if assignment is None or db < best_db:
                        best_db, assignment = db, cand
            degenerate = np.unique(assignment).size < 2
            value = ari(assignment, truth)
        except Exception as exc:  # noqa: BLE001
            log.error("%s d=%d run=%d failed: %s", method, d, run, exc)
            value = float("nan")
        records.append(_record(config, method, d, run, seeds.data, "ari", value, t0))
        if degenerate:
            log.warning("%s d=%d run=%d produced a single cluster", method, d, run)
            records.append(_record(config, method, d, run, seeds.data, "degenerate", 1.0, t0))
    return records, trials


UNITS = {
    "view_recovery": view_recovery_unit,
    "kernel_cls": classification_unit,
    "nn_cls": classification_unit,
    "clustering": clustering_unit,
}


def _run_unit(args):
    config, d, run = args
    return UNITS[config.study](config, d, run)


def run_study(config: ExperimentConfig):
    """Run every (d, run) unit; returns ``(records, trial_logs)`` in a fixed order."""
    units = [(config, d, run) for d in config.d_list for run in range(config.runs)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_unit, units))
    else:
        results = [_run_unit(u) for u in units]
    records: List[RunRecord] = []
    trials: List[dict] = []
    for recs, trs in results:
        records.extend(recs)
        trials.extend(trs)
    return records, trials


def run_view_recovery(config: ExperimentConfig):
    return run_study(config)


def run_classification(config: ExperimentConfig):
    return run_study(config)


def run_clustering(config: ExperimentConfig):
    return run_study(config)
