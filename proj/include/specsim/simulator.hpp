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
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "specsim/acceptance.hpp"
#include "specsim/depth_predictor.hpp"
#include "specsim/egt.hpp"
#include "specsim/latency.hpp"
#include "specsim/scheduler.hpp"
#include "specsim/token_tree.hpp"

namespace specsim {

/// Synthetic drafter distributions. Each iteration draws a context
/// concentration c in [top1_min, top1_max] (kept from the previous iteration
/// with probability `persistence`); a node offers `candidates` children with
/// probabilities c_n * (1 - c_n)^rank, where c_n is c perturbed per node by up
/// to +-node_jitter/2.
struct DrafterSpec {
  double top1_min = 0.4;
  double top1_max = 0.9;
  double persistence = 0.9;
  std::size_t candidates = 8;
  double node_jitter = 0.0;

  void validate() const;
  bool operator==(const DrafterSpec&) const = default;
};

class SyntheticDrafter {
 public:
  SyntheticDrafter(const DrafterSpec& spec, double concentration, std::uint64_t salt);

  // Distribution of the first speculative position; the root takes the top-1.
  std::vector<Candidate> root_candidates() const;
  std::vector<Candidate> operator()(const TokenTree& tree, NodeIndex node) const;
  DrafterDistribution distribution() const;

 private:
  std::vector<Candidate> offer(TokenId parent_token) const;

  DrafterSpec spec_;
  double concentration_;
  std::uint64_t salt_;
};

struct SequencePolicy {
  std::size_t num_draft = 4;
};
struct KAryPolicy {
  std::size_t k = 2;
  std::size_t depth = 3;  // levels below the root
};
struct StaticTreePolicy {
  TokenTree shape{0, 1.0};  // only the parent structure is used
};
struct EgtPolicy {
  EgtConfig egt;
  DepthPredictor predictor = DepthPredictor::fixed(8);
  bool prune = true;
};
using Policy = std::variant<SequencePolicy, KAryPolicy, StaticTreePolicy, EgtPolicy>;

std::string policy_name(const Policy& policy);

// Instantiates a template shape with drafter candidates: a node's r-th child
// takes the r-th ranked candidate of its parent. Subtrees whose rank exceeds
// the offer are dropped.
TokenTree instantiate_template(const TokenTree& shape, const Candidate& root, const DrafterDistribution& drafter);
TokenTree chain_template(std::size_t nodes);
TokenTree kary_template(std::size_t k, std::size_t depth);

/// Non-model stage costs of an iteration. With drafter_stages the head and
/// tail drafts are timed as width-1 drafter passes (the AoT tail draft as a
/// pass over every verified leaf, the AoT head draft at head_inflation x).
struct StageCosts {
  double prepare_verify_us = 0.0;
  double accept_us = 0.0;
  double bonus_sample_us = 0.0;
  bool drafter_stages = false;
  double head_inflation = 2.0;
  bool operator==(const StageCosts&) const = default;
};

struct BreakdownOptions {
  std::size_t fixed_depth = 16;
  double compile_speedup = 2.775;
  std::size_t train_samples = 2000;
  std::size_t train_epochs = 150;
};

struct SimConfig {
  std::uint64_t seed = 0;
  std::size_t iterations = 1000;
  std::size_t replications = 1;
  AcceptanceModel acceptance = AcceptanceModel::surrogate();
  DrafterSpec drafter;
  LatencyProfile drafter_profile = flat_profile(1000.0, 1024, ModelRole::kDrafter);
  LatencyProfile verifier_profile = flat_profile(20000.0, 1024, ModelRole::kVerifier);
  StageCosts stages;
  Policy policy = EgtPolicy{};
  bool plan_search = false;
  PlanSearchOptions plan_options;
  // Graph compilation modeled as a divisor on drafter/verifier latencies.
  double compile_speedup = 1.0;
  // When set, every iteration verifies exactly min(verify_width, nodes) nodes:
  // the top path-probability nodes, a nested family in the width.
  std::optional<std::size_t> verify_width;
  BreakdownOptions breakdown;

  void validate() const;
};

struct IterationRecord {
  std::size_t replication = 0;
  std::size_t iteration = 0;
  double context = 0.0;
  std::size_t depth = 0;
  std::size_t width = 0;
  std::size_t drafted_nodes = 0;
  std::size_t verify_width = 0;
  std::size_t accepted_len = 1;
  double step_us = 0.0;
};

/// Aggregates use ratio-of-means: tpot = mean step latency / mean accepted
/// length. Speedup is against generative decoding on the uncompiled verifier.
struct DecodeStats {
  std::size_t iterations = 0;
  double aal = 0.0;
  double step_latency_us = 0.0;
  double tpot_us = 0.0;
  double speedup = 0.0;
  double mean_depth = 0.0;
  double mean_width = 0.0;
  double mean_verify_width = 0.0;
  std::vector<IterationRecord> trace;
};

// Replications run on up to `jobs` threads; results do not depend on jobs.
DecodeStats run(const SimConfig& config, std::size_t jobs = 1);

struct CompareRow {
  std::string name;
  DecodeStats stats;
  double relative_speedup = 1.0;  // vs the first config
};
std::vector<CompareRow> compare(const std::vector<SimConfig>& configs, std::size_t jobs = 1);

enum class SweepParam { kVerifyWidth, kDraftWidth, kDraftDepth };
std::string sweep_param_name(SweepParam p);
SweepParam parse_sweep_param(const std::string& name);

struct SweepRow {
  std::vector<std::size_t> values;  // one per swept parameter
  double aal = 0.0;
  double step_us = 0.0;
  double tpot_us = 0.0;
  double speedup = 0.0;
};

// Cartesian grid; rows vary the last parameter fastest.
std::vector<SweepRow> sweep(const SimConfig& config, const std::vector<SweepParam>& params,
                            const std::vector<std::vector<std::size_t>>& values, std::size_t jobs = 1);
std::vector<SweepRow> sweep_verify(const SimConfig& config, const std::vector<std::size_t>& widths,
                                   std::size_t jobs = 1);

// Features and realized accepted length along a `chain_depth`-node top-1
// chain, after the feature window has warmed up.
std::vector<DepthSample> collect_depth_samples(const SimConfig& config, std::size_t n, std::size_t chain_depth = 16);

struct BreakdownRow {
  std::string name;
  DecodeStats stats;
};

/// Cumulative ladder: O1 latency-aware EGT (fixed depth, serial, unpruned),
/// O2 + compiled latencies, O3 + verification pruning, O4 + plan search,
/// O5 + depth predictor.
std::vector<BreakdownRow> breakdown(const SimConfig& config, std::size_t jobs = 1);

nlohmann::json stats_to_json(const DecodeStats& stats);
std::string trace_to_csv(const DecodeStats& stats);
std::string sweep_to_csv(const std::vector<SweepParam>& params, const std::vector<SweepRow>& rows);

}  // namespace specsim
