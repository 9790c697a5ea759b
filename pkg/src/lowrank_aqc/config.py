"""Experiment configuration: a JSON file with an explicit schema version."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

SCHEMA_VERSION = 1
EXPERIMENTS = ("theorem1", "theorem2", "theorem3", "theorem4", "figure1",
               "landau-zener", "oracle-equivalence", "sweep")
SWEEP_AXES = ("tau", "N", "m")
MAX_GRID_POINTS = 10**6


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


def _defaults(experiment: str) -> dict:
    third = 1.0 / 3.0
    return {
        "theorem1": {"instance": {"kind": "gus", "N": 10**4, "m": 1}, "params": {"tau_factor": 0.5}},
        "theorem2": {"instance": {"kind": "gus", "N": 10**6, "m": 1}, "C_grid": [third, 0.5, 2 * third]},
        "theorem3": {"instance": {"kind": "gus", "N": 10**4, "m": 4}, "params": {"truncation": "tail"}},
        "theorem4": {"instance": {"kind": "gus", "N": 10**4, "m": 1},
                     "tau_grid": [10.0, 31.622776601683793, 100.0, 316.22776601683796, 1000.0,
                                  3162.2776601683795, 10000.0]},
        "figure1": {"instance": {"kind": "figure1", "N": 10**4}, "params": {"grid": 4001}},
        "landau-zener": {"params": {"deltas": [0.2, 0.1, 0.05], "fidelity": 0.9}},
        "oracle-equivalence": {"params": {"n_instances": 50, "max_N": 64, "max_rank": 4}},
        "sweep": {"grid": {"tau": [10.0, 100.0, 1000.0]}, "params": {"quantity": "overlap"}},
    }[experiment]


@dataclass
class ExperimentConfig:
    experiment: str
    instance: dict = field(default_factory=lambda: {"kind": "gus", "N": 10**4, "m": 1})
    schedule: dict = field(default_factory=lambda: {"kind": "linear"})
    tau: float | None = None
    tau_grid: list | None = None
    C_grid: list | None = None
    tol: float = 1e-10
    seed: int = 0
    out: str = "results"
    workers: int = 1
    grid: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def default(cls, experiment: str) -> "ExperimentConfig":
        if experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}")
        cfg = cls(experiment=experiment, **_defaults(experiment))
        cfg.validate()
        return cfg

    def validate(self) -> "ExperimentConfig":
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}, got {self.schema_version!r}")
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if not isinstance(self.instance, dict) or "kind" not in self.instance:
            raise ConfigError("instance", "must be an object with a 'kind'")
        if not isinstance(self.schedule, dict) or "kind" not in self.schedule:
            raise ConfigError("schedule", "must be an object with a 'kind'")
        if self.tau is not None and not (isinstance(self.tau, (int, float)) and self.tau >= 0):
            raise ConfigError("tau", "must be a nonnegative number")
        for name in ("tau_grid", "C_grid"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, list)
                                  or not all(isinstance(x, (int, float)) and math.isfinite(x) for x in v)):
                raise ConfigError(name, "must be a list of numbers")
        if not isinstance(self.tol, (int, float)) or not 1e-12 <= self.tol <= 1e-6:
            raise ConfigError("tol", f"must lie in [1e-12, 1e-6], got {self.tol!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError("seed", "must be a nonnegative integer")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers", "must be a positive integer")
        if not isinstance(self.grid, dict):
            raise ConfigError("grid", "must be an object mapping axis name to a list of values")
        if len(self.grid) > 2:
            raise ConfigError("grid", f"at most 2 axes, got {len(self.grid)}")
        n = 1
        for axis, values in self.grid.items():
            if axis not in SWEEP_AXES:
                raise ConfigError("grid", f"unknown axis {axis!r}; expected one of {SWEEP_AXES}")
            if not isinstance(values, list):
                raise ConfigError("grid", f"axis {axis!r} must be a list")
            n *= len(values)
        if n > MAX_GRID_POINTS:
            raise ConfigError("grid", f"{n} points exceeds the limit of {MAX_GRID_POINTS}")
        if not isinstance(self.params, dict):
            raise ConfigError("params", "must be an object")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("<root>", "must be a JSON object")
        known = {f.name for f in fields(cls)}
        for key in d:
            if key not in known:
                raise ConfigError(key, "unknown field")
        if "experiment" not in d:
            raise ConfigError("experiment", "missing")
        base = _defaults(d["experiment"]) if d["experiment"] in EXPERIMENTS else {}
        return cls(**{**base, **d}).validate()

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError("<file>", f"invalid JSON: {e}") from None
        return cls.from_dict(d)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")
