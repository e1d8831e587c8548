"""Experiment configuration and result records."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from ..errors import ConfigError
from ..synth import D_SWEEP, INHERENT_VIEWS
from ..tuning import DEFAULT_BUDGET, DEFAULT_FOLDS

STUDIES = ("view_recovery", "kernel_cls", "nn_cls", "clustering")
FUSIONS = ("EF", "MF", "LF")
PARTITIONS = ("inherent", "random", "kmeans", "corr")
DESK_D_LIST = (80, 150, 240, 650)
VIEW_CANDIDATES = (2, 3, 4, 5)

STUDY_EXAMPLES = {
    "view_recovery": (2,),
    "kernel_cls": (1, 2),
    "nn_cls": (1, 2),
    "clustering": (3, 4),
}


@dataclass
class ExperimentConfig:
    study: str
    example_id: int
    d_list: tuple = DESK_D_LIST
    runs: int = 10
    seed_base: int = 0
    fusions: tuple = FUSIONS
    partitions: tuple = PARTITIONS
    budget: int = DEFAULT_BUDGET
    folds: int = DEFAULT_FOLDS
    output: Optional[str] = None
    workers: int = 1
    views: tuple = VIEW_CANDIDATES
    # "view": 1/d_v for view models, "full": 1/d everywhere
    kernel_gamma: str = "view"
    fusion_weights_on: str = "train"
    coreg_lambda: float = 0.02
    coreg_final: str = "concat"
    record_time: bool = False
    # restricts the method grid, e.g. ["EF", "MF-corr"]; empty means all
    methods: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for name in ("d_list", "fusions", "partitions", "views", "methods"):
            value = getattr(self, name)
            if isinstance(value, (str, bytes)):
                raise ConfigError(f"{name} must be a list")
            setattr(self, name, tuple(value))
        self.validate()

    def validate(self):
        if self.study not in STUDIES:
            raise ConfigError(f"unknown study {self.study!r}; expected one of {STUDIES}")
        if self.example_id not in STUDY_EXAMPLES[self.study]:
            raise ConfigError(f"study {self.study} runs on examples {STUDY_EXAMPLES[self.study]}, "
                              f"not {self.example_id}")
        if not self.d_list:
            raise ConfigError("d_list must not be empty")
        for d in self.d_list:
            if not isinstance(d, int) or d < 1:
                raise ConfigError(f"invalid dimension {d!r}")
            if self.example_id in (2, 4) and d % INHERENT_VIEWS:
                raise ConfigError(f"example {self.example_id} needs d divisible by {INHERENT_VIEWS}, got {d}")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if self.budget < 1:
            raise ConfigError("budget must be at least 1")
        if self.folds < 1:
            raise ConfigError("folds must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        bad = set(self.fusions) - set(FUSIONS)
        if bad:
            raise ConfigError(f"unknown fusion mode(s) {sorted(bad)}")
        bad = set(self.partitions) - set(PARTITIONS)
        if bad:
            raise ConfigError(f"unknown partition method(s) {sorted(bad)}")
        if not self.views or any(v < 2 for v in self.views):
            raise ConfigError("view candidates must be integers >= 2")
        if self.kernel_gamma not in ("view", "full"):
            raise ConfigError("kernel_gamma must be 'view' or 'full'")
        if self.fusion_weights_on != "train":
            raise ConfigError("fusion_weights_on supports only 'train'")
        if self.coreg_final not in ("concat", "first"):
            raise ConfigError("coreg_final must be 'concat' or 'first'")
        if self.coreg_lambda < 0:
            raise ConfigError("coreg_lambda must be non-negative")
        grid = set(method_labels(self.study, self.example_id, FUSIONS, PARTITIONS))
        bad = set(self.methods) - grid
        if bad:
            raise ConfigError(f"method(s) {sorted(bad)} not in the grid for this study")

    def resolved_methods(self):
        labels = method_labels(self.study, self.example_id, self.fusions, self.partitions)
        if self.methods:
            labels = [m for m in labels if m in self.methods]
        return labels

    def to_dict(self) -> dict:
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, tuple):
                out[k] = list(v)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config field(s) {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)


def method_labels(study, example_id, fusions=FUSIONS, partitions=PARTITIONS):
    """Method grid in output order, e.g. ``EF``, ``MF-corr``, ``LF-random``."""
    if study == "view_recovery":
        return [p for p in partitions if p != "inherent"]
    labels = ["EF"] if "EF" in fusions else []
    parts = [p for p in PARTITIONS if p in partitions and (p != "inherent" or example_id in (2, 4))]
    for fusion in ("MF", "LF"):
        if fusion in fusions:
            labels.extend(f"{fusion}-{p}" for p in parts)
    return labels


RUNS_HEADER = ("study", "method", "example", "d", "run", "seed", "metric", "value", "wall_ms")


@dataclass
class RunRecord:
    study: str
    method: str
    example: int
    d: int
    run: int
    seed: int
    metric: str
    value: float
    wall_ms: Optional[float] = None

    def row(self):
        return [self.study, self.method, self.example, self.d, self.run, self.seed, self.metric,
                repr(float(self.value)), "" if self.wall_ms is None else f"{self.wall_ms:.1f}"]
