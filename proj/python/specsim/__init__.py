# Copyright 2026 The specsim Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python front end for the specsim simulator."""

import json
import os

from ._core import (
    ConfigError,
    DomainError,
    IndexError,
    LatencyProfile,
    ParseError,
    TokenTree,
    expected_accepted_length as _expected_accepted_length,
    max_value_subtree,
    path_accept_probs as _path_accept_probs,
    prune_verify,
    sequence_speedup,
    tree_speedup,
)
from . import _core

__all__ = [
    "ConfigError",
    "DomainError",
    "IndexError",
    "LatencyProfile",
    "ParseError",
    "TokenTree",
    "breakdown",
    "expected_accepted_length",
    "max_value_subtree",
    "path_accept_probs",
    "plan_search",
    "prune_verify",
    "sequence_speedup",
    "simulate",
    "sweep",
    "train_predictor",
    "tree_speedup",
]


def _config(config, base_dir=None):
    """Returns (json text, base dir) for a config dict or a path to one."""
    if isinstance(config, (str, os.PathLike)):
        path = os.fspath(config)
        with open(path, encoding="utf-8") as f:
            text = f.read()
        return text, base_dir or os.path.dirname(os.path.abspath(path))
    return json.dumps(config), base_dir or os.getcwd()


def expected_accepted_length(tree, model=None):
    return _expected_accepted_length(tree, json.dumps(model or {"variant": "surrogate"}))


def path_accept_probs(tree, model=None):
    return _path_accept_probs(tree, json.dumps(model or {"variant": "surrogate"}))


def simulate(config, jobs=1, trace=False, base_dir=None):
    text, base = _config(config, base_dir)
    return json.loads(_core._run(text, base, jobs, trace))


def sweep(config, params, jobs=1, base_dir=None):
    """params maps a parameter name to its ascending values; several names form a grid."""
    text, base = _config(config, base_dir)
    names = list(params)
    return json.loads(_core._sweep(text, base, names, [list(params[n]) for n in names], jobs))


def breakdown(config, jobs=1, base_dir=None):
    text, base = _config(config, base_dir)
    return json.loads(_core._breakdown(text, base, jobs))


def plan_search(stages_csv, draft_depth=4, aal=1.0):
    return json.loads(_core._plan_search(stages_csv, draft_depth, aal))


def train_predictor(config, samples=2000, chain_depth=16, epochs=200, seed=0, base_dir=None):
    text, base = _config(config, base_dir)
    return json.loads(_core._train_predictor(text, base, samples, chain_depth, epochs, seed))
