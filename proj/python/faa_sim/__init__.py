# Copyright 2026 The FAA-Sim Authors
# SPDX-License-Identifier: Apache-2.0

"""Python bindings for the FAA simulator core."""

import json as _json

from ._core import (
    ConfigError,
    InputError,
    NumericError,
    PartitionError,
    ShapeError,
    __version__,
    best_ada,
    chol_psd,
    compute_qiid,
    gen_population,
    impression,
    partition_by_qiid,
    sample_features,
    validate_config,
)
from ._core import run_experiment as _run_experiment


def run_experiment(config, overrides=()):
    """Run an experiment from a config dict or JSON string and return the report dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_run_experiment(text, list(overrides)))


__all__ = [
    "ConfigError",
    "InputError",
    "NumericError",
    "PartitionError",
    "ShapeError",
    "__version__",
    "best_ada",
    "chol_psd",
    "compute_qiid",
    "gen_population",
    "impression",
    "partition_by_qiid",
    "run_experiment",
    "sample_features",
    "validate_config",
]
