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
#include <functional>
#include <span>
#include <vector>

#include "specsim/acceptance.hpp"
#include "specsim/latency.hpp"
#include "specsim/token_tree.hpp"

namespace specsim {

struct Candidate {
  TokenId token = 0;
  double prob = 0.0;
};

// Given a frontier node, returns child candidates in descending probability
// with total mass <= 1.
using DrafterDistribution = std::function<std::vector<Candidate>(const TokenTree&, NodeIndex)>;

struct EgtConfig {
  std::vector<std::size_t> candidate_widths{1, 2, 4, 8};
  std::size_t max_depth = 16;
  std::size_t max_verify = 64;
  std::size_t expansion_k = 8;

  void validate() const;
};

struct GrowStepResult {
  std::vector<NodeIndex> added;
  bool shortfall = false;
};

/// One equal-growth step. The frontier is the deepest level of the tree (the
/// nodes added by the previous step, or the root on the first step). Every
/// frontier node proposes its top expansion_k candidates; the width
/// candidates with the largest surrogate path gain path(parent) * prob are
/// attached, whichever parents they hang from. Ties go to the lower parent
/// index, then the better-ranked candidate.
GrowStepResult grow_step(TokenTree& tree, const DrafterDistribution& drafter, std::size_t width,
                         std::size_t expansion_k);

struct GrowResult {
  TokenTree tree;
  bool shortfall = false;
};

// Root plus depth equal-growth steps of width nodes each.
GrowResult grow_egt(const Candidate& root, const DrafterDistribution& drafter, std::size_t depth, std::size_t width,
                    std::size_t expansion_k);

/// Maximum-value connected root subtree of every size up to max_size, by
/// bottom-up tree-knapsack merging of children (O(N * max_size)).
/// best()[k] is the largest sum of values over connected subtrees containing
/// the root with exactly k nodes (best()[0] = 0).
class MaxValueSubtree {
 public:
  MaxValueSubtree(const TokenTree& tree, std::span<const double> values, std::size_t max_size);

  const std::vector<double>& best() const { return best_root_; }
  std::size_t max_size() const { return best_root_.size() - 1; }

  // Sorted node indices of an optimal subtree of size k (1 <= k <= max_size()).
  std::vector<NodeIndex> select(std::size_t k) const;

 private:
  void collect(NodeIndex v, std::size_t k, std::vector<NodeIndex>& out) const;

  const TokenTree* tree_;
  // choice_[v][j][t]: nodes given to child j of v when v's partial subtree
  // (v plus children 0..j) has t nodes.
  std::vector<std::vector<std::vector<std::size_t>>> choice_;
  std::vector<double> best_root_;
};

// The k nodes with the largest values (ties to the lower index). When values
// never increase from parent to child, as path acceptance products do, this
// set is a connected root subtree and is nested in k.
std::vector<NodeIndex> top_k_subtree(std::span<const double> values, std::size_t k);

struct PruneResult {
  Subtree pruned;
  std::size_t verify_width = 1;
  double aal_estimate = 1.0;
  double speedup_estimate = 0.0;
  std::vector<double> best;  // best[k] from the knapsack
};

/// Picks the verification width k <= max_verify maximizing the tree speedup
/// objective with AAL = 1 + best[k] and returns the corresponding subtree.
/// Ties go to the smaller k.
PruneResult prune_verify(const TokenTree& tree, const AcceptanceModel& model, const LatencyProfile& drafter_profile,
                         const LatencyProfile& verifier_profile, std::size_t draft_depth, std::size_t draft_width,
                         std::size_t max_verify);

struct WidthSelection {
  std::size_t width = 1;
  std::vector<double> speedups;  // aligned with EgtConfig::candidate_widths
  std::vector<double> aal_estimates;
  GrowResult grown;  // provisional tree of the winning width
  std::optional<PruneResult> pruned;  // set when widths were scored after pruning
};

/// Grows a provisional tree per candidate width at the given depth and
/// evaluates the tree speedup objective with W_verify = min(nodes,
/// max_verify); the AAL estimate comes from the surrogate (drafter)
/// probabilities. Ties go to the smaller width.
///
/// With score_pruned each width is scored by the speedup of its pruned
/// verification subtree instead (prune_verify under the surrogate model),
/// matching a pipeline that prunes after growing.
WidthSelection select_width(const EgtConfig& config, std::size_t depth, const Candidate& root,
                            const DrafterDistribution& drafter, const LatencyProfile& drafter_profile,
                            const LatencyProfile& verifier_profile, bool score_pruned = false);

}  // namespace specsim
