"""Pipeline configuration: defaults, INI loading, and validation.

Defaults are the operating points the pipeline was tuned for: match and
clustering radius 8, density 5, decay smoother 25, graph threshold 0.45
with a degree-10 filter, screenshot cutoff 0.5. Every run persists its
resolved configuration next to its outputs.
"""

from __future__ import annotations

import configparser
import dataclasses
import json
from dataclasses import dataclass

from .metric import FULL_WEIGHTS, PARTIAL_WEIGHTS, MetricConfig, MetricConfigError


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    eps: int = 8
    min_pts: int = 5
    theta: int = 8
    tau: float = 25.0
    formula: str = "exp_decay"
    full_weights: tuple[float, float, float, float] = FULL_WEIGHTS
    partial_weights: tuple[float, float, float, float] = PARTIAL_WEIGHTS
    kappa: float = 0.45
    degree_min: int = 10
    screenshot_cutoff: float = 0.5
    hawkes_beta: float = 86400.0  # one day, in post-timestamp seconds
    hawkes_dmax: float = 604800.0  # seven days
    hawkes_iters: int = 500
    hawkes_burnin: int = 200
    prior_shape: float = 1.0
    prior_rate: float = 1.0
    seed: int = 0
    threads: int = 1
    strict: bool = True

    def metric_config(self) -> MetricConfig:
        return MetricConfig(
            tau=self.tau,
            full_weights=self.full_weights,
            partial_weights=self.partial_weights,
            formula=self.formula,
        )

    def validate(self) -> "PipelineConfig":
        problems = []
        if not 0 <= self.eps <= 64:
            problems.append(f"eps must be in [0, 64], got {self.eps}")
        if self.min_pts < 1:
            problems.append(f"min_pts must be >= 1, got {self.min_pts}")
        if not 0 <= self.theta <= 64:
            problems.append(f"theta must be in [0, 64], got {self.theta}")
        if not 0.0 < self.kappa <= 1.0:
            problems.append(f"kappa must be in (0, 1], got {self.kappa}")
        if self.degree_min < 0:
            problems.append(f"degree_min must be >= 0, got {self.degree_min}")
        if not 0.0 <= self.screenshot_cutoff <= 1.0:
            problems.append(f"screenshot_cutoff must be in [0, 1], got {self.screenshot_cutoff}")
        if self.hawkes_beta <= 0 or self.hawkes_dmax <= 0:
            problems.append("hawkes beta and dmax must be positive")
        if not self.hawkes_iters > self.hawkes_burnin >= 0:
            problems.append("hawkes iters must exceed burnin, burnin must be >= 0")
        if self.prior_shape <= 0 or self.prior_rate <= 0:
            problems.append("prior shape and rate must be positive")
        if self.threads < 1:
            problems.append(f"threads must be >= 1, got {self.threads}")
        try:
            self.metric_config().validate()
        except MetricConfigError as e:
            problems.append(str(e))
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=1, sort_keys=True) + "\n"


_FLOAT_KEYS = {"tau", "kappa", "screenshot_cutoff", "hawkes_beta", "hawkes_dmax", "prior_shape", "prior_rate"}
_INT_KEYS = {"eps", "min_pts", "theta", "degree_min", "hawkes_iters", "hawkes_burnin", "seed", "threads"}
_WEIGHT_KEYS = {"full_weights", "partial_weights"}
_BOOL_KEYS = {"strict"}
_STR_KEYS = {"formula"}


def load_config(path) -> PipelineConfig:
    """Read a flat key = value INI file; sections are ignored so related keys
    may be grouped freely. Unknown keys are rejected."""
    parser = configparser.ConfigParser()
    with open(path, "r", encoding="utf-8") as fh:
        parser.read_string("[root]\n" + fh.read())
    cfg = PipelineConfig()
    for section in parser.sections():
        for key, value in parser.items(section):
            if key in _INT_KEYS:
                setattr(cfg, key, int(value))
            elif key in _FLOAT_KEYS:
                setattr(cfg, key, float(value))
            elif key in _WEIGHT_KEYS:
                parts = tuple(float(x) for x in value.split(","))
                if len(parts) != 4:
                    raise ConfigError(f"{key} needs 4 comma-separated weights")
                setattr(cfg, key, parts)
            elif key in _BOOL_KEYS:
                setattr(cfg, key, value.strip().lower() in ("1", "true", "yes", "on"))
            elif key in _STR_KEYS:
                setattr(cfg, key, value.strip())
            else:
                raise ConfigError(f"unknown config key {key!r}")
    return cfg.validate()
