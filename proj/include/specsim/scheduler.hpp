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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace specsim {

enum class Resource { kCpu, kGpu };

enum class StageKind { kHeadDraft, kDraftStep, kPrepareVerify, kVerify, kAccept, kTailDraft, kBonusSample };

std::string stage_kind_name(StageKind kind);
Resource stage_resource(StageKind kind);

struct Stage {
  StageKind kind = StageKind::kVerify;
  std::size_t step = 0;  // 1-based for kDraftStep, 0 otherwise
  Resource resource = Resource::kGpu;
  double duration_us = 0.0;
  std::optional<double> aot_duration_us;  // duration once moved ahead of time

  std::string name() const;  // e.g. "draft_step_3", "verify"
};

enum class EdgeKind { kHard, kSpeculative };

// carried == true links a stage of iteration i to a stage of iteration i + 1.
struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  EdgeKind kind = EdgeKind::kHard;
  bool carried = false;
  bool operator==(const Edge&) const = default;
};

enum class AotTransform { kTailDraft, kHeadDraft };
std::string aot_name(AotTransform t);

/// Stage dependency graph of one decoding iteration. Stages are stored in a
/// topological order of the intra-iteration edges.
class DepGraph {
 public:
  std::size_t add_stage(Stage stage);
  void add_edge(std::size_t from, std::size_t to, EdgeKind kind, bool carried = false);
  bool remove_edge(std::size_t from, std::size_t to, bool carried);

  const std::vector<Stage>& stages() const { return stages_; }
  std::vector<Stage>& stages() { return stages_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<AotTransform>& applied() const { return applied_; }
  std::vector<AotTransform>& applied() { return applied_; }

  std::optional<std::size_t> find(StageKind kind, std::size_t step = 0) const;
  bool has_edge(std::size_t from, std::size_t to, bool carried) const;
  std::vector<std::size_t> predecessors(std::size_t stage, bool carried) const;

  // Kahn's algorithm over intra-iteration edges.
  bool is_acyclic() const;

 private:
  std::vector<Stage> stages_;
  std::vector<Edge> edges_;
  std::vector<AotTransform> applied_;
};

/// Profiled stage durations. AoT variants default to base * inflation.
struct StageProfiles {
  double head_draft_us = 0.0;
  double draft_step_us = 0.0;
  std::vector<double> draft_steps_us;  // optional per-step override, size D
  double prepare_verify_us = 0.0;
  double verify_us = 0.0;
  double accept_us = 0.0;
  double tail_draft_us = 0.0;
  double bonus_sample_us = 0.0;
  std::optional<double> head_draft_aot_us;
  std::optional<double> tail_draft_aot_us;
  double head_inflation = 2.0;
  double tail_inflation = 2.0;  // number of candidate leaves drafted ahead of time

  double head_draft_aot() const { return head_draft_aot_us.value_or(head_draft_us * head_inflation); }
  double tail_draft_aot() const { return tail_draft_aot_us.value_or(tail_draft_us * tail_inflation); }
  void validate() const;
};

// CSV "stage,variant,duration_us", variant in {base, aot}.
StageProfiles parse_stage_profiles(const std::string& text);
StageProfiles load_stage_profiles(const std::string& path);

/// Canonical iteration graph:
///   head_draft -> draft_step_1 -> ... -> draft_step_D -> prepare_verify
///   -> verify -> accept -> bonus_sample, verify -> tail_draft,
///   accept -> tail_draft (speculative).
/// Carried to the next iteration: accept -> head_draft (speculative),
/// tail_draft -> head_draft, bonus_sample -> draft_step_1.
DepGraph build_graph(std::size_t draft_depth, const StageProfiles& profiles);

/// TailDraftAot drops accept -> tail_draft and switches tail_draft to its AoT
/// duration. HeadDraftAot drops the carried accept -> head_draft so the next
/// head draft follows the tail (bonus) draft directly, at its AoT duration.
DepGraph apply_aot(const DepGraph& graph, AotTransform transform);

struct ScheduledStage {
  std::size_t iteration = 0;
  std::size_t stage = 0;
  double start_us = 0.0;
  double end_us = 0.0;
};

struct Timeline {
  std::size_t iterations = 1;
  std::vector<ScheduledStage> entries;
  double makespan_us = 0.0;

  // Mean time per iteration of the unrolled window.
  double cycle_us() const { return makespan_us / static_cast<double>(iterations); }
};

/// List scheduling on one CPU lane and one GPU lane. The window unrolls
/// `iterations` copies of the graph joined by carried edges; stages are
/// placed in priority order (repeated per iteration) at the earliest time
/// their predecessors have finished and their lane is free.
Timeline schedule(const DepGraph& graph, const std::vector<std::size_t>& priority, std::size_t iterations = 1);

// Empty when every edge and lane-exclusivity constraint holds.
std::vector<std::string> timeline_violations(const DepGraph& graph, const Timeline& timeline);

bool is_topological(const DepGraph& graph, const std::vector<std::size_t>& priority);
std::vector<std::size_t> canonical_priority(const DepGraph& graph);
std::vector<std::size_t> critical_path_priority(const DepGraph& graph);
std::vector<std::size_t> cpu_first_priority(const DepGraph& graph);
// Lexicographic by stage index; stops after `limit` orders.
std::vector<std::vector<std::size_t>> all_topological_orders(const DepGraph& graph, std::size_t limit = 100000);

struct ExecutionPlan {
  std::vector<AotTransform> transforms;
  std::vector<std::size_t> priority;
};

struct PlanSearchOptions {
  std::size_t iterations = 4;       // unrolled window per evaluation
  std::size_t exhaustive_limit = 12;  // stage count up to which all orders are tried
};

struct PlanResult {
  ExecutionPlan plan;
  DepGraph graph;  // transformed graph of the chosen plan
  Timeline timeline;
  double per_token_us = 0.0;  // cycle / expected AAL
  double canonical_per_token_us = 0.0;
  std::size_t plans_evaluated = 0;
};

/// Grid search over the four AoT subsets and a family of priority orders,
/// minimizing iteration cycle time per expected accepted token. Ties keep
/// the earlier plan: fewer transforms, then the canonical order.
PlanResult plan_search(const StageProfiles& profiles, std::size_t draft_depth, double expected_aal,
                       const PlanSearchOptions& options = {});

nlohmann::json plan_to_json(const PlanResult& result);

}  // namespace specsim
