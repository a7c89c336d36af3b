"""Flat key/value experiment configuration.

Grammar: one ``key = value`` assignment per line, ``#`` starts a comment,
lists are comma separated.  Unknown keys are rejected.  Every key can be
overridden on the command line with ``--set key=value``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields
from typing import Any

EXPERIMENTS = (
    "lcu-propagation",
    "qsvt-propagation",
    "trotter-vs-sparsto",
    "qsvt-vs-sparse",
    "locality-sweep",
    "crossover",
    "fit-coefficients",
)

OUTPUT_DIR_ENV = "HAMSIM_OUT_DIR"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _log_grid(lo: float, hi: float, count: int) -> list[float]:
    step = (math.log10(hi) - math.log10(lo)) / (count - 1)
    return [10.0 ** (math.log10(lo) + i * step) for i in range(count)]


@dataclass
class ExperimentConfig:
    experiment: str = "trotter-vs-sparsto"

    # ensemble
    n_qubits: int = 8
    weight_k: int = 6
    weight_mode: str = "upto_k"
    term_counts: list[int] = field(default_factory=lambda: [100, 1000, 10000])
    distributions: list[str] = field(default_factory=lambda: [
        "lognormal:2.0", "lognormal:6.0", "pareto:0.9"])
    random_signs: bool = True

    # evolution
    t_multiplier: float = 10.0          # time in units of 1/lambda
    thresholds: list[float] = field(default_factory=lambda: [0.3, 0.9])
    trotter_orders: list[int] = field(default_factory=lambda: [1, 2])
    r_grid: list[int] = field(default_factory=lambda: [
        1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048])
    sparsto_r_grid: list[int] = field(default_factory=lambda: [
        1, 2, 4, 8, 16, 32, 64, 128, 256])
    n_grid: list[int] = field(default_factory=lambda: [
        100, 316, 1000, 3162, 10000, 31623])
    d_grid: list[int] = field(default_factory=list)   # empty = auto
    locality_grid: list[int] = field(default_factory=lambda: [2, 3, 4, 5, 6])

    # error-propagation grids
    eps_prep_grid: list[float] = field(
        default_factory=lambda: _log_grid(1e-4, 1e-1, 10))
    eps_sel_grid: list[float] = field(
        default_factory=lambda: [1e-5, 1e-4, 1e-3, 1e-2])

    # statistics
    n_instances: int = 10
    n_realizations: int = 10
    base_seed: int = 2026

    # resource model
    synthesis_slope: float = 3.0
    synthesis_offset: float = 0.0
    select_toffolis_per_term: float = 2.0
    select_fanout_cnots_per_weight: float = 1.0
    select_cnots_per_term: float = 0.0
    qsvt_norm_mode: str = "realized"

    # fitting
    input_files: list[str] = field(default_factory=list)
    tail_quantile: float = -1.0         # < 0 disables the tail cutoff

    # output
    output: str = ""
    record_wall_time: bool = False

    def distribution_objects(self):
        from hamsim.ensembles import parse_distribution
        return [parse_distribution(label) for label in self.distributions]

    def synthesis_model(self):
        from hamsim.resources import SynthesisModel
        return SynthesisModel(self.synthesis_slope, self.synthesis_offset)

    def select_model(self):
        from hamsim.resources import SelectCostModel
        return SelectCostModel(self.select_toffolis_per_term,
                               self.select_fanout_cnots_per_weight,
                               self.select_cnots_per_term)

    def output_path(self) -> str:
        if self.output:
            return self.output
        base = os.environ.get(OUTPUT_DIR_ENV, ".")
        return os.path.join(base, f"{self.experiment}.csv")

    def validate(self) -> None:
        problems = []
        if self.experiment not in EXPERIMENTS:
            problems.append(f"unknown experiment {self.experiment!r}")
        if self.n_qubits < 1:
            problems.append("n_qubits must be positive")
        if not 1 <= self.weight_k <= self.n_qubits:
            problems.append("weight_k must be in 1..n_qubits")
        if self.experiment == "locality-sweep" and self.locality_grid \
                and max(self.locality_grid) > self.n_qubits:
            problems.append("locality_grid entries must be <= n_qubits")
        if self.weight_mode not in ("upto_k", "exactly_k"):
            problems.append("weight_mode must be upto_k or exactly_k")
        if self.n_instances < 1:
            problems.append("n_instances must be >= 1")
        if self.n_realizations < 1:
            problems.append("n_realizations must be >= 1")
        for name in ("term_counts", "distributions", "thresholds",
                     "trotter_orders", "r_grid", "sparsto_r_grid", "n_grid",
                     "eps_prep_grid", "eps_sel_grid", "locality_grid"):
            if not getattr(self, name):
                problems.append(f"{name} must be nonempty")
        if any(not 0 < tau <= 1 for tau in self.thresholds):
            problems.append("thresholds must lie in (0, 1]")
        if any(p not in (1, 2) for p in self.trotter_orders):
            problems.append("trotter_orders entries must be 1 or 2")
        if self.qsvt_norm_mode not in ("realized", "original"):
            problems.append("qsvt_norm_mode must be realized or original")
        if self.experiment == "fit-coefficients" and not self.input_files:
            # synthetic mode still needs an ensemble to draw from
            if not self.term_counts or not self.distributions:
                problems.append("fit-coefficients needs input_files or an ensemble")
        try:
            self.distribution_objects()
        except ValueError as exc:
            problems.append(str(exc))
        if problems:
            raise ConfigError("; ".join(problems))


# Per-experiment defaults applied before file values and --set overrides.
EXPERIMENT_DEFAULTS: dict[str, dict[str, Any]] = {
    "lcu-propagation": {
        "n_qubits": 4, "weight_k": 4, "term_counts": [16],
        "distributions": ["pareto:0.9"], "n_instances": 200,
    },
    "qsvt-propagation": {
        "n_qubits": 4, "weight_k": 4, "term_counts": [16],
        "distributions": ["pareto:0.9"], "n_instances": 3,
        "t_multiplier": 50.0,
    },
    "qsvt-vs-sparse": {
        "n_realizations": 5,
    },
    "locality-sweep": {
        "weight_mode": "exactly_k", "term_counts": [1000],
        "distributions": ["lognormal:2.0"],
    },
    "fit-coefficients": {
        "term_counts": [10000], "n_instances": 1,
    },
}


def _parse_scalar(text: str, target_type) -> Any:
    text = text.strip()
    if target_type is bool:
        if text.lower() in ("true", "yes", "1"):
            return True
        if text.lower() in ("false", "no", "0"):
            return False
        raise ConfigError(f"expected a boolean, got {text!r}")
    if target_type is int:
        return int(text)
    if target_type is float:
        return float(text)
    return text


def _field_types() -> dict[str, Any]:
    hints = {}
    for f in fields(ExperimentConfig):
        hints[f.name] = f.type
    return hints


_LIST_ELEM = {"term_counts": int, "distributions": str, "thresholds": float,
              "trotter_orders": int, "r_grid": int, "sparsto_r_grid": int,
              "n_grid": int, "d_grid": int, "locality_grid": int,
              "eps_prep_grid": float, "eps_sel_grid": float,
              "input_files": str}


def parse_value(key: str, text: str) -> Any:
    """Parse one assignment's right-hand side for a known key."""
    hints = _field_types()
    if key not in hints:
        raise ConfigError(f"unknown config key {key!r}")
    if key in _LIST_ELEM:
        items = [part.strip() for part in text.split(",")]
        items = [part for part in items if part]
        return [_parse_scalar(part, _LIST_ELEM[key]) for part in items]
    current = getattr(ExperimentConfig(), key)
    return _parse_scalar(text, type(current))


def parse_assignments(lines, source: str = "<config>") -> dict[str, Any]:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, _, text = line.partition("=")
        key = key.strip()
        try:
            values[key] = parse_value(key, text)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    return values


def build_config(file_values: dict[str, Any],
                 overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Defaults -> experiment overlay -> file values -> --set overrides."""
    merged: dict[str, Any] = {}
    experiment = (overrides or {}).get("experiment") \
        or file_values.get("experiment") \
        or ExperimentConfig().experiment
    merged.update(EXPERIMENT_DEFAULTS.get(experiment, {}))
    merged.update(file_values)
    if overrides:
        merged.update(overrides)
    merged["experiment"] = experiment
    config = ExperimentConfig(**merged)
    config.validate()
    return config


def load_config(path, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as handle:
        values = parse_assignments(handle, source=str(path))
    return build_config(values, overrides)


def config_metadata(config: ExperimentConfig) -> list[tuple[str, str]]:
    """Sorted (key, rendered value) pairs for the CSV metadata header.

    The output path is omitted: it says where the file lives, not what the
    experiment computed, and must not break byte-level comparisons."""
    out = []
    for f in sorted(fields(ExperimentConfig), key=lambda f: f.name):
        if f.name == "output":
            continue
        value = getattr(config, f.name)
        if isinstance(value, list):
            rendered = ",".join(str(v) for v in value)
        else:
            rendered = str(value)
        out.append((f.name, rendered))
    return out
