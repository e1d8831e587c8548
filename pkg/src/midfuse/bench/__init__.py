"""Experiment harness: configuration, study runners and result files."""

from .config import ExperimentConfig, RunRecord, method_labels
from .report import emit, summarize
from .studies import run_classification, run_clustering, run_study, run_view_recovery

__all__ = ["ExperimentConfig", "RunRecord", "method_labels", "emit", "summarize", "run_study",
           "run_view_recovery", "run_classification", "run_clustering"]
