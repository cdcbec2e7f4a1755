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
import json
import pathlib

import pytest

import specsim

DATA = pathlib.Path(__file__).resolve().parents[2] / "data"


def chain(probs):
    tree = specsim.TokenTree(0, probs[0])
    for i, p in enumerate(probs[1:]):
        tree.add_child(i, i + 1, p)
    return tree


def test_chain_accepted_length():
    tree = chain([0.5, 0.5, 0.5])
    assert specsim.expected_accepted_length(tree) == pytest.approx(1 + 0.5 + 0.25 + 0.125)
    assert tree.structure_array() == [-1, 0, 1]


def test_depth_decay_model():
    tree = chain([1.0, 1.0])
    aal = specsim.expected_accepted_length(tree, {"variant": "depth_decay", "p0": 0.8, "gamma": 0.5})
    assert aal == pytest.approx(1 + 0.8 + 0.8 * 0.4)


def test_mask_and_json_round_trip():
    tree = specsim.TokenTree(1, 0.6)
    tree.add_child(0, 2, 0.3)
    tree.add_child(0, 3, 0.2)
    assert tree.mask() == [[1, 0, 0], [1, 1, 0], [1, 0, 1]]
    again = specsim.TokenTree.from_json(tree.to_json())
    assert again.structure_array() == tree.structure_array()


def test_sibling_mass_rejected():
    tree = specsim.TokenTree(0, 1.0)
    tree.add_child(0, 1, 0.7)
    with pytest.raises(specsim.DomainError):
        tree.add_child(0, 2, 0.7)


def test_profile_and_speedup():
    flat = specsim.LatencyProfile([(1, 100.0), (64, 100.0)])
    assert flat.at(10) == pytest.approx(100.0)
    free = specsim.LatencyProfile([(1, 0.0), (64, 0.0)])
    # Free drafting and flat verification: speedup equals the accepted length.
    assert specsim.tree_speedup(3.0, 2, 2, 4, free, flat) == pytest.approx(3.0)
    assert specsim.sequence_speedup(3.0, 4, free, flat) == pytest.approx(3.0)


def test_prune_and_knapsack():
    tree = chain([0.9, 0.9, 0.9, 0.9])
    best = specsim.max_value_subtree(tree, [1.0, 2.0, 3.0, 4.0], 4)
    assert best == pytest.approx([0.0, 1.0, 3.0, 6.0, 10.0])
    drafter = specsim.LatencyProfile([(1, 10.0), (64, 10.0)])
    verifier = specsim.LatencyProfile([(1, 1000.0), (64, 1000.0)])
    result = specsim.prune_verify(tree, drafter, verifier, 4, 1, 4)
    assert result["verify_width"] == len(result["kept"])
    assert result["speedup_estimate"] > 1.0


def test_plan_search():
    plan = specsim.plan_search((DATA / "stages.csv").read_text(), draft_depth=4, aal=3.0)
    assert plan["cycle_us"] > 0


def small_config():
    cfg = json.loads((DATA / "default.json").read_text())
    cfg["iterations"] = 100
    cfg["replications"] = 2
    return cfg


def test_simulate_is_deterministic():
    cfg = small_config()
    a = specsim.simulate(cfg, base_dir=str(DATA))
    b = specsim.simulate(cfg, jobs=2, base_dir=str(DATA))
    assert a == b
    assert a["aal"] >= 1.0 and a["speedup"] > 0


def test_sweep_rows():
    rows = specsim.sweep(small_config(), {"verify_width": [4, 8]}, base_dir=str(DATA))
    assert [r["values"] for r in rows] == [[4], [8]]


def test_bad_config():
    with pytest.raises(specsim.ConfigError):
        specsim.simulate({"seed": 1, "bogus": 2})
