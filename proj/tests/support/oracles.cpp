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

#include "oracles.hpp"

#include <bit>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace specsim::oracle {

TokenTree random_tree(RandomStream& rng, std::size_t n) {
  TokenTree tree(static_cast<TokenId>(rng.below(1000)), rng.uniform());
  std::vector<double> used(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const auto parent = static_cast<NodeIndex>(rng.below(i));
    const double prob = rng.uniform() * (1.0 - used[parent]);
    used[parent] += prob;
    tree.add_child(parent, static_cast<TokenId>(rng.below(1000)), prob);
  }
  return tree;
}

std::vector<std::vector<bool>> ancestor_walk(const TokenTree& tree) {
  const std::size_t n = tree.size();
  std::vector<std::vector<bool>> out(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<NodeIndex> cur = i;
    while (cur) {
      out[i][*cur] = true;
      cur = tree.node(*cur).parent;
    }
  }
  return out;
}

double path_product_walk(const AcceptanceModel& model, const TokenTree& tree, NodeIndex i) {
  double p = 1.0;
  std::optional<NodeIndex> cur = i;
  while (cur) {
    p *= node_prob(model, tree, *cur);
    cur = tree.node(*cur).parent;
  }
  return p;
}

namespace {

void walk_outcomes(const AcceptanceModel& model, const TokenTree& tree, NodeIndex node, double mass,
                   std::size_t accepted, std::vector<double>& dist) {
  double stop = 1.0;
  for (NodeIndex c : tree.children(node)) {
    const double q = node_prob(model, tree, c);
    stop -= q;
    if (q > 0.0) walk_outcomes(model, tree, c, mass * q, accepted + 1, dist);
  }
  dist[accepted + 1] += mass * stop;
}

}  // namespace

std::vector<double> enumerate_length_distribution(const AcceptanceModel& model, const TokenTree& tree) {
  std::vector<double> dist(tree.size() + 2, 0.0);
  const double p0 = node_prob(model, tree, 0);
  dist[1] += 1.0 - p0;
  if (p0 > 0.0) walk_outcomes(model, tree, 0, p0, 1, dist);
  return dist;
}

double enumerate_expected_length(const AcceptanceModel& model, const TokenTree& tree) {
  const auto dist = enumerate_length_distribution(model, tree);
  double e = 0.0;
  for (std::size_t len = 0; len < dist.size(); ++len) e += static_cast<double>(len) * dist[len];
  return e;
}

std::vector<double> brute_force_best_subtree(const TokenTree& tree, std::span<const double> values) {
  const std::size_t n = tree.size();
  if (n > 20) throw std::invalid_argument("brute force limited to 20 nodes");
  std::vector<double> best(n + 1, -std::numeric_limits<double>::infinity());
  best[0] = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << n); mask += 2) {
    bool connected = true;
    double sum = 0.0;
    for (std::size_t i = 0; i < n && connected; ++i) {
      if (!(mask >> i & 1u)) continue;
      const auto parent = tree.node(i).parent;
      if (parent && !(mask >> *parent & 1u)) connected = false;
      sum += values[i];
    }
    if (!connected) continue;
    const auto k = static_cast<std::size_t>(std::popcount(mask));
    if (sum > best[k]) best[k] = sum;
  }
  return best;
}

}  // namespace specsim::oracle
