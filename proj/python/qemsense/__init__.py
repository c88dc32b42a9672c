# Copyright 2026 The qemsense Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Quasi-probabilistic error mitigation for qubit sensors."""

import json as _json

from ._core import (  # noqa: F401
    QemsenseError,
    __version__,
    bath_signal,
    build_plan,
    choi,
    dephasing_ptm,
    dipolar_coupling,
    inverse_ptm,
    is_cptp,
    measurement_frame_ptm,
    optimize,
    output_columns,
    overhead,
    realize_extremal,
    relaxation_ptm,
    thermalization_ptm,
)
from . import _core


def validate_config(config):
    """Validate a config given as a dict or JSON text."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _core.validate_config(text)


def run(config, threads=1):
    """Run a sweep; returns one dict per time point."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _core.run(text, threads)
