// Copyright 2026 The specsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include <json.hpp>

#include "specsim/simulator.hpp"

namespace specsim {

/// Experiment configuration document. Relative file references (latency
/// profiles, static tree shapes, predictor checkpoints) resolve against
/// base_dir. Unknown keys are rejected.
///
///   {"seed": 7, "iterations": 1000, "replications": 4,
///    "profiles": {"drafter": "drafter.csv", "verifier": "verifier.csv"},
///    "acceptance": {"variant": "surrogate"},
///    "drafter": {"top1_min": 0.4, "top1_max": 0.9, "persistence": 0.9},
///    "stages": {"prepare_verify_us": 300, "accept_us": 200},
///    "policy": {"kind": "egt", "candidate_widths": [1, 2, 4, 8],
///               "depth_predictor": {"kind": "fixed", "depth": 8}},
///    "plan_search": true, "compile_speedup": 1.0}
SimConfig config_from_json(const nlohmann::json& doc, const std::string& base_dir = ".");
SimConfig load_config(const std::string& path);

Policy policy_from_json(const nlohmann::json& doc, const std::string& base_dir = ".");

}  // namespace specsim
