"""Writing run records, summaries and the echoed configuration to disk."""

from __future__ import annotations

import csv
import json
import os
from collections import OrderedDict
from typing import Iterable, List, Optional, Sequence

from ..metrics import RunSummary
from .config import RUNS_HEADER, ExperimentConfig, RunRecord

SUMMARY_HEADER = ("study", "method", "example", "d", "metric", "n", "mean", "std", "median")
TABLE1_HEADER = ("method", "n", "mean", "std", "median")


def _fmt(x: float) -> str:
    return "" if x != x else repr(float(x))


def summarize(records: Sequence[RunRecord], pool_d: bool = False):
    """Group records by (study, method, example, d, metric) and summarize.

    With ``pool_d`` the d values are pooled and ``d`` is reported as ``"all"``.
    Group order follows first appearance in ``records``.
    """
    groups: "OrderedDict[tuple, List[float]]" = OrderedDict()
    for r in records:
        key = (r.study, r.method, r.example, "all" if pool_d else r.d, r.metric)
        groups.setdefault(key, []).append(r.value)
    return [(key, RunSummary.from_values(vals)) for key, vals in groups.items()]


def _write_rows(path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit(records: Sequence[RunRecord], path, config: Optional[ExperimentConfig] = None,
         trials: Iterable[dict] = ()) -> dict:
    """Write ``runs.csv``, ``summary.csv``, ``config.json`` and ``trials.jsonl`` under ``path``.

    Returns a mapping from file kind to the written path.
    """
    if not records:
        raise ValueError("no records to emit")
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc}") from exc
    out = {"runs": os.path.join(path, "runs.csv"), "summary": os.path.join(path, "summary.csv")}
    _write_rows(out["runs"], RUNS_HEADER, [r.row() for r in records])
    summary_rows = []
    for (study, method, example, d, metric), s in summarize(records):
        summary_rows.append([study, method, example, d, metric, len(s.values), _fmt(s.mean), _fmt(s.std),
                             _fmt(s.median)])
    _write_rows(out["summary"], SUMMARY_HEADER, summary_rows)
    if config is not None:
        out["config"] = os.path.join(path, "config.json")
        with open(out["config"], "w") as fh:
            json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    trials = list(trials)
    if trials:
        out["trials"] = os.path.join(path, "trials.jsonl")
        with open(out["trials"], "w") as fh:
            for t in trials:
                fh.write(json.dumps(t, sort_keys=True) + "\n")
    return out


def table1(records: Sequence[RunRecord]):
    """ARI summary per partition method pooled over all runs and d values."""
    return [(key[1], s) for key, s in summarize(records, pool_d=True) if key[4] == "ari"]


def emit_table1(records: Sequence[RunRecord], path) -> str:
    target = os.path.join(path, "table1.csv")
    rows = [[m, len(s.values), _fmt(s.mean), _fmt(s.std), _fmt(s.median)] for m, s in table1(records)]
    _write_rows(target, TABLE1_HEADER, rows)
    return target


def format_table(rows, header) -> str:
    cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells)
