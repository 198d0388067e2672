"""Branching processes in random environment: simulation, distances and experiments."""

import json as _json

from ._bpre import (
    BpreError,
    EnvironmentSpec,
    __version__,
    assignment_oracle,
    canonical_config,
    derive_path_seed,
    discretize_normal,
    doubling_environment,
    finite_environment,
    interval_environment,
    ks_statistic,
    model_moments,
    reference_environment,
    simulate_path,
    wasserstein,
    zolotarev_1,
    zolotarev_2,
)
from ._bpre import run_experiment_json as _run_experiment_json
from ._bpre import validate_conditions as _validate_conditions

EXPERIMENTS = ("lln", "lil", "invariance", "clt-rate", "moments", "laplace")


def validate_conditions(spec, delta=0.9, p=2.0, c=1.0):
    """Condition report for `spec` as a dict."""
    return _json.loads(_validate_conditions(spec, delta, p, c))


def run_experiment(config, experiment, syntax="toml"):
    """Run one experiment from config text and return its report as a dict.

    `config` is TOML (or JSON with syntax="json") in the same schema the
    command-line tool reads.
    """
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}")
    return _json.loads(_run_experiment_json(config, syntax, experiment))


__all__ = [
    "BpreError",
    "EXPERIMENTS",
    "EnvironmentSpec",
    "__version__",
    "assignment_oracle",
    "canonical_config",
    "derive_path_seed",
    "discretize_normal",
    "doubling_environment",
    "finite_environment",
    "interval_environment",
    "ks_statistic",
    "model_moments",
    "reference_environment",
    "run_experiment",
    "simulate_path",
    "validate_conditions",
    "wasserstein",
    "zolotarev_1",
    "zolotarev_2",
]
