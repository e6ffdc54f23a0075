"""Soft inductive limits, j-convergence diagnostics and scale-limit case studies."""

import json

from ._limitflow import (
    CapExceeded,
    ConfigError,
    LimitflowError,
    Refused,
    ShapeError,
    fermion,
    list_experiments,
    tail_verdict,
    thompson,
)
from . import _limitflow as _core

__all__ = [
    "CapExceeded",
    "ConfigError",
    "LimitflowError",
    "Refused",
    "ShapeError",
    "describe",
    "fermion",
    "list_experiments",
    "resolved_params",
    "run",
    "run_experiment",
    "tail_verdict",
    "thompson",
]


def _dump(config):
    return config if isinstance(config, str) else json.dumps(config)


def describe(experiment_id):
    """Parameter schema of an experiment."""
    return json.loads(_core.describe(experiment_id))


def resolved_params(config):
    """Params of a config merged over the experiment defaults."""
    return json.loads(_core.resolved_params(_dump(config)))


def run_experiment(config):
    """Run a config (dict or JSON string) in memory and return the report dict."""
    return json.loads(_core.run_experiment(_dump(config)))


def run(config, out_dir):
    """Run a config and write verdict.json, manifest.json and tables/ to out_dir.

    Returns (exit_code, message) with the CLI exit code convention.
    """
    return _core.run(_dump(config), str(out_dir))
