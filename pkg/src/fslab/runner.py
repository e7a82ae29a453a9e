"""Configuration-driven runs: validation, CSV emission, figure rendering.

A config is a single JSON object with an ``experiment`` name, a mandatory
integer ``seed`` (no wall-clock defaults), experiment parameters, and
optional ``workers`` / ``output`` / ``figure`` fields.  Reruns of an
identical config are byte-identical, for any worker count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import subprocess
from dataclasses import dataclass
from pathlib import Path

from .experiments import EXPERIMENTS, TEMPLATES, run_experiment

__all__ = ["ExperimentConfig", "ConfigError", "NumericalFailure", "load_config", "run", "print_config"]

CSV_HEADER = ["experiment", "param_json", "stat", "value", "stderr", "n", "seed", "build"]


class ConfigError(ValueError):
    """Unparseable or invalid experiment configuration (exit code 1)."""


class NumericalFailure(RuntimeError):
    """A run produced non-finite statistics (exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict
    seed: int
    workers: int
    output: Path
    figure: bool

    @property
    def param_json(self) -> str:
        return json.dumps(self.params, sort_keys=True, separators=(",", ":"))

    @property
    def run_hash(self) -> str:
        key = f"{self.experiment}|{self.param_json}|{self.seed}"
        return hashlib.sha1(key.encode()).hexdigest()[:10]


def _resolve_workers(config_workers) -> int:
    env = os.environ.get("LAB_WORKERS")
    if env:
        return max(1, int(env))
    if config_workers:
        return max(1, int(config_workers))
    return max(1, os.cpu_count() or 1)


def load_config(obj: dict | str | Path) -> ExperimentConfig:
    """Validate a config mapping (or JSON file path) into an ExperimentConfig."""
    if isinstance(obj, (str, Path)):
        try:
            obj = json.loads(Path(obj).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    name = obj.get("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    if "seed" not in obj:
        raise ConfigError("config must set an explicit integer seed (no wall-clock default)")
    try:
        seed = int(obj["seed"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("seed must be an integer") from exc
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must fit in 64 bits")
    workers = _resolve_workers(obj.get("workers"))
    params = {
        key: val
        for key, val in obj.items()
        if key not in ("experiment", "seed", "workers", "output", "figure") and not key.startswith("_")
    }
    # eager validation of common parameters so bad configs exit with code 1
    if "n" in params and int(params["n"]) <= 0:
        raise ConfigError("n must be positive")
    if name == "paircorr" and "edges" in params:
        import numpy as np

        edges = np.asarray(params["edges"], dtype=float)
        if np.any(np.diff(edges) > 0.25):
            raise ConfigError("BinTooWide: pair-correlation bins must not span more than 0.25")
    return ExperimentConfig(
        experiment=name,
        params=params,
        seed=seed,
        workers=workers,
        output=Path(obj.get("output", ".")),
        figure=bool(obj.get("figure", True)),
    )


_build_cache: list[str] = []


def build_tag() -> str:
    """git describe of the working tree, else the package version."""
    if _build_cache:
        return _build_cache[0]
    try:
        tag = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            cwd=Path(__file__).parent,
            timeout=10,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        tag = ""
    if not tag:
        from . import __version__

        tag = f"fslab-{__version__}"
    _build_cache.append(tag)
    return tag


def rows_to_csv(config: ExperimentConfig, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    build = build_tag()
    pj = config.param_json
    for stat, value, stderr, n in rows:
        writer.writerow(
            [config.experiment, pj, stat, repr(float(value)), repr(float(stderr)), int(n), config.seed, build]
        )
    return buf.getvalue()


def run(config: ExperimentConfig) -> tuple[Path, Path | None]:
    """Execute an experiment; returns the CSV path and figure path (if any)."""
    rows, payload = run_experiment(config.experiment, config.params, config.seed, config.workers)
    import math

    for stat, value, stderr, _ in rows:
        if not (math.isfinite(float(value)) and math.isfinite(float(stderr))):
            raise NumericalFailure(f"non-finite statistic {stat!r} = ({value}, {stderr})")
    config.output.mkdir(parents=True, exist_ok=True)
    csv_path = config.output / f"{config.experiment}-{config.run_hash}.csv"
    csv_path.write_text(rows_to_csv(config, rows))
    fig_path = None
    if config.figure:
        from .figures import render_figure

        fig_path = config.output / f"{config.experiment}-{config.run_hash}.svg"
        render_figure(config.experiment, payload, fig_path)
    return csv_path, fig_path


def print_config(experiment: str) -> str:
    """The documented JSON template for an experiment."""
    if experiment not in TEMPLATES:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {sorted(TEMPLATES)}")
    return json.dumps(TEMPLATES[experiment], indent=2, sort_keys=True)
