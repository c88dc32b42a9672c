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

import math
import os

import numpy as np
import pytest

import qemsense as q


def test_dephasing_overhead_closed_form():
    for g in (0.1, 0.5, 1.0, 2.0):
        p = q.overhead(q.inverse_ptm(q.dephasing_ptm(g)))
        assert abs(p - (math.exp(g) - 1) / 2) < 1e-9


def test_plan_reconstructs_inverse():
    noise = q.relaxation_ptm(0.7, 0.2)
    inv = q.inverse_ptm(noise)
    plan = q.build_plan(inv)
    assert np.max(np.abs(plan["weighted_ptm"] - inv)) < 1e-9
    assert plan["p"] == pytest.approx(math.exp(0.7) - 1, abs=1e-9)
    assert all(q.is_cptp(c["ptm"], 1e-9) for c in plan["circuits"])


def test_optimizer_never_worse_than_inverse():
    res = q.optimize(q.measurement_frame_ptm(q.relaxation_ptm(1.0)))
    assert res["p"] <= res["p_inverse"] + 1e-12


def test_choi_of_identity_is_rank_one():
    c = q.choi(np.eye(4))
    assert np.linalg.matrix_rank(c) == 1
    assert np.trace(c).real == pytest.approx(2.0)


def test_empty_bath_is_coherent():
    w = q.bath_signal(0.0, 40.0, 10.0, 3, 2, 1, [0.0, 1.0, 5.0])
    assert np.allclose(w, 1.0)


def test_validate_reports_all_errors():
    r = q.validate_config({"shots": 0, "sensing": {"mode": "ac", "field_nT": 1, "tau_grid_us": [1]},
                           "noise": {"kind": "dephasing"}})
    assert not r["ok"]
    assert any("shots must be" in e for e in r["errors"])
    assert any("omega_s" in e for e in r["errors"])


def test_run_none_strategy_passes_through():
    cfg = {"seed": 1, "shots": 1000,
           "sensing": {"field_nT": 50.0, "tau_grid_us": [1.0, 2.0]},
           "noise": {"kind": "dephasing", "gamma": 0.05},
           "mitigation_strategy": "none"}
    rows = q.run(cfg)
    assert [r["tau_us"] for r in rows] == [1.0, 2.0]
    assert all(r["s_mitigated"] == r["s_noisy"] for r in rows)
    assert rows == q.run(cfg)


def test_bad_config_raises():
    with pytest.raises(ValueError):
        q.run({"noise": {"kind": "dephasing"}})


@pytest.mark.skipif("QEMSENSE_CONFIG_DIR" not in os.environ, reason="config directory not set")
def test_shipped_configs_validate():
    d = os.environ["QEMSENSE_CONFIG_DIR"]
    for name in sorted(os.listdir(d)):
        with open(os.path.join(d, name)) as f:
            assert q.validate_config(f.read())["ok"], name
