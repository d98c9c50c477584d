# Copyright 2026 The p804kit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Python bindings for the p804kit speech quality toolkit."""

import json

import numpy as np

from ._core import (
    P804Error,
    bandpass_noise,
    bartlett,
    correlation_matrix,
    corrected_ranking,
    efa,
    icc_k,
    kendall_tau_b,
    kmo,
    pearson,
    spearman,
    tau_b95,
    varimax,
)
from . import _core

__all__ = [
    "P804Error",
    "aggregate_mos",
    "bandpass_noise",
    "bartlett",
    "build_packages",
    "correlation_matrix",
    "corrected_ranking",
    "efa",
    "error_code",
    "icc_k",
    "kendall_tau_b",
    "kmo",
    "mediation",
    "pearson",
    "spearman",
    "tau_b95",
    "varimax",
]


def error_code(exc):
    """Return the machine-readable code of a P804Error."""
    return str(exc).split(":", 1)[0]


def aggregate_mos(votes, level="clip"):
    """MOS and 95% CI half-width per key and scale.

    votes: iterable of (clip_id, model_id or None, scale, value).
    """
    return _core.aggregate_mos([tuple(v) for v in votes], level)


def mediation(values, columns, predictors=None, mediator="Signal", outcome="Overall"):
    if predictors is None:
        predictors = [c for c in columns if c not in (mediator, outcome)]
    return _core.mediation(np.asarray(values, dtype=float), list(columns), list(predictors), mediator, outcome)


def build_packages(clips, golds, traps, config=None, seed=1):
    """Partition clip dicts into packages; returns package dicts."""
    out = _core.build_packages_json(
        json.dumps(list(clips)), json.dumps(list(golds)), json.dumps(list(traps)), json.dumps(config or {}), seed
    )
    return json.loads(out)
