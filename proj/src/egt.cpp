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

#include "specsim/egt.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "specsim/error.hpp"

namespace specsim {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct ScoredCandidate {
  double score;
  NodeIndex parent;
  std::size_t rank;
  Candidate candidate;
};

}  // namespace

void EgtConfig::validate() const {
  if (candidate_widths.empty()) throw ConfigError("EGT candidate_widths must not be empty");
  for (std::size_t i = 0; i < candidate_widths.size(); ++i) {
    if (candidate_widths[i] < 1) throw ConfigError("EGT candidate widths must be >= 1");
    if (i > 0 && candidate_widths[i] <= candidate_widths[i - 1]) {
      throw ConfigError("EGT candidate_widths must be strictly increasing");
    }
  }
  if (max_depth < 1) throw ConfigError("EGT max_depth must be >= 1");
  if (max_verify < 1) throw ConfigError("EGT max_verify must be >= 1");
  if (expansion_k < 1) throw ConfigError("EGT expansion_k must be >= 1");
}

GrowStepResult grow_step(TokenTree& tree, const DrafterDistribution& drafter, std::size_t width,
                         std::size_t expansion_k) {
  if (width < 1) throw DomainError("draft width must be >= 1");
  const std::vector<NodeIndex> frontier = tree.levels().back();
  const auto surrogate = AcceptanceModel::surrogate();

  std::vector<ScoredCandidate> scored;
  for (NodeIndex f : frontier) {
    const double path = path_accept_prob(surrogate, tree, f);
    const auto cands = drafter(tree, f);
    const std::size_t take = std::min(expansion_k, cands.size());
    for (std::size_t r = 0; r < take; ++r) {
      if (r > 0 && cands[r].prob > cands[r - 1].prob) {
        throw DomainError("drafter candidates must be sorted by descending probability");
      }
      scored.push_back({path * cands[r].prob, f, r, cands[r]});
    }
  }
  std::stable_sort(scored.begin(), scored.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.parent != b.parent) return a.parent < b.parent;
    return a.rank < b.rank;
  });

  GrowStepResult result;
  result.shortfall = scored.size() < width;
  scored.resize(std::min(width, scored.size()));
  // Attach grouped by parent so each child list stays in rank order.
  std::sort(scored.begin(), scored.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    return a.parent != b.parent ? a.parent < b.parent : a.rank < b.rank;
  });
  for (const auto& s : scored) {
    result.added.push_back(tree.add_child(s.parent, s.candidate.token, s.candidate.prob));
  }
  return result;
}

GrowResult grow_egt(const Candidate& root, const DrafterDistribution& drafter, std::size_t depth, std::size_t width,
                    std::size_t expansion_k) {
  if (depth < 1) throw DomainError("draft depth must be >= 1");
  GrowResult out{TokenTree(root.token, root.prob), false};
  for (std::size_t step = 0; step < depth; ++step) {
    const auto r = grow_step(out.tree, drafter, width, expansion_k);
    out.shortfall = out.shortfall || r.shortfall;
    if (r.added.empty()) break;
  }
  return out;
}

MaxValueSubtree::MaxValueSubtree(const TokenTree& tree, std::span<const double> values, std::size_t max_size)
    : tree_(&tree) {
  const std::size_t n = tree.size();
  if (values.size() != n) throw DomainError("one value per tree node required");
  if (max_size < 1) throw DomainError("subtree size bound must be >= 1");
  const std::size_t cap = std::min(max_size, n);

  std::vector<std::vector<double>> dp(n);
  choice_.assign(n, {});
  for (NodeIndex v = n; v-- > 0;) {
    std::vector<double> cur{kNegInf, values[v]};
    const auto& kids = tree.children(v);
    choice_[v].resize(kids.size());
    for (std::size_t j = 0; j < kids.size(); ++j) {
      const auto& child = dp[kids[j]];
      const std::size_t child_cap = child.size() - 1;
      const std::size_t size = std::min(cur.size() - 1 + child_cap, cap);
      std::vector<double> next(size + 1, kNegInf);
      auto& pick = choice_[v][j];
      pick.assign(size + 1, 0);
      for (std::size_t t = 1; t <= size; ++t) {
        const std::size_t s_max = std::min(child_cap, t - 1);
        for (std::size_t s = 0; s <= s_max; ++s) {
          if (t - s >= cur.size()) continue;
          const double base = cur[t - s];
          if (base == kNegInf) continue;
          const double cand = base + (s == 0 ? 0.0 : child[s]);
          if (cand > next[t]) {
            next[t] = cand;
            pick[t] = s;
          }
        }
      }
      cur = std::move(next);
      std::vector<double>().swap(dp[kids[j]]);
    }
    dp[v] = std::move(cur);
  }
  best_root_ = std::move(dp[0]);
  best_root_[0] = 0.0;
}

void MaxValueSubtree::collect(NodeIndex v, std::size_t k, std::vector<NodeIndex>& out) const {
  const auto& kids = tree_->children(v);
  std::size_t t = k;
  for (std::size_t j = kids.size(); j-- > 0;) {
    const std::size_t s = choice_[v][j][t];
    if (s > 0) collect(kids[j], s, out);
    t -= s;
  }
  out.push_back(v);
}

std::vector<NodeIndex> MaxValueSubtree::select(std::size_t k) const {
  if (k < 1 || k > max_size()) throw IndexError("subtree size out of range: " + std::to_string(k));
  std::vector<NodeIndex> out;
  out.reserve(k);
  collect(0, k, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeIndex> top_k_subtree(std::span<const double> values, std::size_t k) {
  std::vector<NodeIndex> order(values.size());
  std::iota(order.begin(), order.end(), NodeIndex{0});
  std::stable_sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) { return values[a] > values[b]; });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

PruneResult prune_verify(const TokenTree& tree, const AcceptanceModel& model, const LatencyProfile& drafter_profile,
                         const LatencyProfile& verifier_profile, std::size_t draft_depth, std::size_t draft_width,
                         std::size_t max_verify) {
  if (max_verify < 1) throw DomainError("max_verify must be >= 1");
  const auto values = path_accept_probs(model, tree);
  const MaxValueSubtree knapsack(tree, values, max_verify);
  const auto& best = knapsack.best();

  std::size_t best_k = 1;
  double best_speedup = kNegInf;
  for (std::size_t k = 1; k < best.size(); ++k) {
    const double s = tree_speedup(1.0 + best[k], TreeShape{draft_width, draft_depth, k}, drafter_profile,
                                  verifier_profile);
    if (s > best_speedup) {
      best_speedup = s;
      best_k = k;
    }
  }
  const auto keep = knapsack.select(best_k);
  return PruneResult{induced_subtree(tree, keep), best_k, 1.0 + best[best_k], best_speedup, best};
}

WidthSelection select_width(const EgtConfig& config, std::size_t depth, const Candidate& root,
                            const DrafterDistribution& drafter, const LatencyProfile& drafter_profile,
                            const LatencyProfile& verifier_profile, bool score_pruned) {
  config.validate();
  if (depth < 1 || depth > config.max_depth) throw DomainError("depth outside [1, max_depth]");
  const auto surrogate = AcceptanceModel::surrogate();

  std::optional<WidthSelection> best;
  std::vector<double> speedups;
  std::vector<double> aals;
  for (std::size_t w : config.candidate_widths) {
    auto grown = grow_egt(root, drafter, depth, w, config.expansion_k);
    if (score_pruned) {
      auto pr = prune_verify(grown.tree, surrogate, drafter_profile, verifier_profile, depth, w, config.max_verify);
      const double s = pr.speedup_estimate;
      speedups.push_back(s);
      aals.push_back(pr.aal_estimate);
      if (!best || s > best->speedups.back()) best = WidthSelection{w, {s}, {}, std::move(grown), std::move(pr)};
      continue;
    }
    auto values = path_accept_probs(surrogate, grown.tree);
    const std::size_t k = std::min(grown.tree.size(), config.max_verify);
    std::partial_sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end(),
                      std::greater<>());
    const double aal = 1.0 + std::accumulate(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
    const double s = tree_speedup(aal, TreeShape{w, depth, k}, drafter_profile, verifier_profile);
    speedups.push_back(s);
    aals.push_back(aal);
    if (!best || s > best->speedups.back()) {
      best = WidthSelection{w, {s}, {}, std::move(grown), std::nullopt};
    }
  }
  best->speedups = std::move(speedups);
  best->aal_estimates = std::move(aals);
  return std::move(*best);
}

}  // namespace specsim
